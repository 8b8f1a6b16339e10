#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intervenidar/game/state.hpp"

namespace intervenidar::render {

// Fixed grayscale bands. Golden images depend on these values.
struct Palette {
  std::uint8_t background = 0;
  std::uint8_t track = 72;
  std::uint8_t painted = 144;
  std::uint8_t enemy = 200;
  std::uint8_t player = 255;
};

struct RenderConfig {
  // Pixels per tile edge. Sprites occupy the tile interior and leave a
  // one-pixel ring of track colour, so paint under a sprite stays visible.
  int tile_px = 4;
  Palette palette;
};

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const Frame&) const = default;
};

inline constexpr int kStackDepth = 4;

// Frames t-3 .. t, earliest first.
struct Observation {
  std::array<Frame, kStackDepth> frames;

  bool operator==(const Observation&) const = default;
};

Frame render(const game::GameState& state, const RenderConfig& config = {});

// Uses the last (at most) four states, earliest first; a shorter history is
// front-padded with copies of its first frame. Throws on an empty history.
Observation observe(std::span<const game::GameState> history, const RenderConfig& config = {});

// Rolling four-frame stack for incremental use during an episode.
class FrameStack {
 public:
  void reset(const Frame& first);
  void push(Frame frame);
  Observation observation() const;
  bool empty() const { return count_ == 0; }

 private:
  std::array<Frame, kStackDepth> frames_;
  int count_ = 0;
};

// Binary PGM (P5, maxval 255).
std::string to_pgm(const Frame& frame);
Frame parse_pgm(std::string_view bytes);
void write_pgm(const Frame& frame, const std::filesystem::path& path);
Frame read_pgm(const std::filesystem::path& path);

}  // namespace intervenidar::render
