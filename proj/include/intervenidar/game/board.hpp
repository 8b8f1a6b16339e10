#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "intervenidar/game/types.hpp"
#include "intervenidar/mdp/error.hpp"

namespace intervenidar::game {

enum class TileKind : std::uint8_t { kEmpty = 0, kTrack = 1, kIntersection = 2 };

enum class Orientation : std::uint8_t { kHorizontal, kVertical };

// A straight run of track between two intersections, endpoints included.
// Whether it is filled is game state, not board structure.
struct LineSegment {
  int id = 0;
  Orientation orientation = Orientation::kHorizontal;
  TilePos first;  // top / left endpoint
  TilePos last;   // bottom / right endpoint
  std::vector<TilePos> tiles;

  bool shares_endpoint(const LineSegment& other) const {
    return first == other.first || first == other.last || last == other.first || last == other.last;
  }
};

class BoardError : public Error {
 public:
  enum class Defect {
    kMalformedMap,
    kNoTrack,
    kDisconnected,
    kDeadEnd,      // a segment endpoint that is not an intersection
    kThickTrack,   // 2x2 block of track, segments would be ambiguous
    kSegmentCount,
    kBadPlacement,
  };
  BoardError(Defect defect, std::string message) : Error(std::move(message)), defect(defect) {}
  Defect defect;
};

// Tile grid plus the derived track graph. Intersections are track tiles where
// track branches or turns; segments are maximal straight runs between them.
// Segment ids follow a row-major scan: at each intersection the rightward
// run is numbered before the downward one.
class Board {
 public:
  // '#' = track, '.' = empty. Throws BoardError naming the defect.
  static Board from_rows(const std::vector<std::string>& rows);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(TilePos p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }
  std::size_t index(TilePos p) const { return static_cast<std::size_t>(p.y) * width_ + p.x; }
  TilePos position(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }
  std::size_t tile_count() const { return tiles_.size(); }

  TileKind kind(TilePos p) const { return in_bounds(p) ? tiles_[index(p)] : TileKind::kEmpty; }
  bool is_track(TilePos p) const { return kind(p) != TileKind::kEmpty; }
  bool is_intersection(TilePos p) const { return kind(p) == TileKind::kIntersection; }

  // 4-bit mask of track neighbours, bit i set for kDirections[i].
  std::uint8_t neighbor_mask(TilePos p) const;

  const std::vector<LineSegment>& segments() const { return segments_; }
  // Ids of segments that contain the tile (an intersection belongs to several).
  std::span<const int> segments_at(TilePos p) const;
  std::vector<int> adjacent_segments(int segment_id) const;

  std::size_t track_tile_count() const { return track_tiles_; }
  // Number of 4-adjacent track tile pairs.
  std::size_t track_edge_count() const;

  std::vector<std::string> rows() const;
  bool same_layout(const Board& other) const { return tiles_ == other.tiles_ && width_ == other.width_; }

  // BFS distance over track tiles, -1 when unreachable.
  std::vector<int> distances_from(TilePos start) const;

  // New board with a vertical run of track on `column` between rows
  // `top` and `bottom` (both must already be track). Revalidates.
  Board with_vertical_segment(int column, int top, int bottom) const;

 private:
  void derive();

  int width_ = 0;
  int height_ = 0;
  std::vector<TileKind> tiles_;
  std::vector<LineSegment> segments_;
  std::vector<std::vector<int>> tile_segments_;
  std::size_t track_tiles_ = 0;
};

}  // namespace intervenidar::game
