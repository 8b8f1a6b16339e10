#include "intervenidar/game/board.hpp"

#include <deque>

namespace intervenidar::game {

std::string to_string(TilePos p) { return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")"; }

std::string to_string(Direction d) {
  switch (d) {
    case Direction::kUp: return "up";
    case Direction::kRight: return "right";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
  }
  return "?";
}

Direction direction_from_string(const std::string& s) {
  for (auto d : kDirections)
    if (to_string(d) == s) return d;
  throw FormatError("unknown direction '" + s + "'");
}

Board Board::from_rows(const std::vector<std::string>& rows) {
  using D = BoardError::Defect;
  if (rows.empty() || rows[0].empty()) throw BoardError(D::kMalformedMap, "board: tile map is empty");
  Board b;
  b.height_ = static_cast<int>(rows.size());
  b.width_ = static_cast<int>(rows[0].size());
  b.tiles_.assign(static_cast<std::size_t>(b.width_) * b.height_, TileKind::kEmpty);
  for (int y = 0; y < b.height_; ++y) {
    if (static_cast<int>(rows[y].size()) != b.width_) {
      throw BoardError(D::kMalformedMap, "board: row " + std::to_string(y) + " has width " +
                                             std::to_string(rows[y].size()) + ", expected " +
                                             std::to_string(b.width_));
    }
    for (int x = 0; x < b.width_; ++x) {
      const char c = rows[y][x];
      if (c == '#') b.tiles_[b.index({x, y})] = TileKind::kTrack;
      else if (c != '.')
        throw BoardError(D::kMalformedMap, std::string("board: unknown tile character '") + c + "' at " +
                                               to_string(TilePos{x, y}));
    }
  }
  b.derive();
  return b;
}

std::uint8_t Board::neighbor_mask(TilePos p) const {
  std::uint8_t mask = 0;
  for (std::size_t i = 0; i < kDirections.size(); ++i)
    if (is_track(neighbor(p, kDirections[i]))) mask |= static_cast<std::uint8_t>(1u << i);
  return mask;
}

void Board::derive() {
  using D = BoardError::Defect;
  track_tiles_ = 0;
  TilePos first_track{-1, -1};
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] == TileKind::kEmpty) continue;
    tiles_[i] = TileKind::kTrack;
    if (track_tiles_ == 0) first_track = position(i);
    ++track_tiles_;
  }
  if (track_tiles_ == 0) throw BoardError(D::kNoTrack, "board: no track tiles");

  for (int y = 0; y + 1 < height_; ++y)
    for (int x = 0; x + 1 < width_; ++x)
      if (is_track({x, y}) && is_track({x + 1, y}) && is_track({x, y + 1}) && is_track({x + 1, y + 1}))
        throw BoardError(D::kThickTrack, "board: 2x2 block of track at " + to_string(TilePos{x, y}));

  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] == TileKind::kEmpty) continue;
    const TilePos p = position(i);
    const std::uint8_t m = neighbor_mask(p);
    const int degree = __builtin_popcount(m);
    if (degree <= 1) {
      throw BoardError(D::kDeadEnd, "board: track tile " + to_string(p) +
                                        " is a dead end, so a segment would end on a non-intersection");
    }
    const bool straight = (m == 0b0101) || (m == 0b1010);
    if (!(degree == 2 && straight)) tiles_[i] = TileKind::kIntersection;
  }

  const auto dist = distances_from(first_track);
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] != TileKind::kEmpty && dist[i] < 0) {
      throw BoardError(D::kDisconnected, "board: track is disconnected; " + to_string(position(i)) +
                                             " cannot reach " + to_string(first_track));
    }
  }

  segments_.clear();
  tile_segments_.assign(tiles_.size(), {});
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] != TileKind::kIntersection) continue;
    const TilePos start = position(i);
    for (Direction d : {Direction::kRight, Direction::kDown}) {
      if (!is_track(neighbor(start, d))) continue;
      LineSegment s;
      s.id = static_cast<int>(segments_.size());
      s.orientation = d == Direction::kRight ? Orientation::kHorizontal : Orientation::kVertical;
      s.first = start;
      s.tiles.push_back(start);
      TilePos p = neighbor(start, d);
      while (true) {
        if (!is_track(p)) {
          // Straight tiles always continue; this only triggers on corrupted maps.
          throw BoardError(D::kDeadEnd, "board: run from " + to_string(start) + " ends off track");
        }
        s.tiles.push_back(p);
        if (is_intersection(p)) break;
        p = neighbor(p, d);
      }
      s.last = p;
      for (const auto& t : s.tiles) tile_segments_[index(t)].push_back(s.id);
      segments_.push_back(std::move(s));
    }
  }
}

std::span<const int> Board::segments_at(TilePos p) const {
  if (!in_bounds(p)) return {};
  return tile_segments_[index(p)];
}

std::vector<int> Board::adjacent_segments(int segment_id) const {
  const auto& s = segments_.at(segment_id);
  std::vector<int> out;
  for (TilePos end : {s.first, s.last})
    for (int id : segments_at(end))
      if (id != segment_id && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Board::track_edge_count() const {
  std::size_t edges = 0;
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] == TileKind::kEmpty) continue;
    const TilePos p = position(i);
    if (is_track(neighbor(p, Direction::kRight))) ++edges;
    if (is_track(neighbor(p, Direction::kDown))) ++edges;
  }
  return edges;
}

std::vector<std::string> Board::rows() const {
  std::vector<std::string> out(height_, std::string(width_, '.'));
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (is_track({x, y})) out[y][x] = '#';
  return out;
}

std::vector<int> Board::distances_from(TilePos start) const {
  std::vector<int> dist(tiles_.size(), -1);
  if (!is_track(start)) return dist;
  std::deque<TilePos> frontier{start};
  dist[index(start)] = 0;
  while (!frontier.empty()) {
    const TilePos p = frontier.front();
    frontier.pop_front();
    for (Direction d : kDirections) {
      const TilePos q = neighbor(p, d);
      if (!is_track(q) || dist[index(q)] >= 0) continue;
      dist[index(q)] = dist[index(p)] + 1;
      frontier.push_back(q);
    }
  }
  return dist;
}

Board Board::with_vertical_segment(int column, int top, int bottom) const {
  using D = BoardError::Defect;
  if (column < 0 || column >= width_ || top < 0 || bottom >= height_ || bottom - top < 2) {
    throw BoardError(D::kBadPlacement, "board: vertical segment out of range");
  }
  if (!is_track({column, top}) || !is_track({column, bottom})) {
    throw BoardError(D::kBadPlacement, "board: new segment endpoints must lie on existing track");
  }
  Board b = *this;
  for (int y = top + 1; y < bottom; ++y) {
    if (b.is_track({column, y})) throw BoardError(D::kBadPlacement, "board: new segment overlaps existing track");
    b.tiles_[b.index({column, y})] = TileKind::kTrack;
  }
  b.derive();
  return b;
}

}  // namespace intervenidar::game
