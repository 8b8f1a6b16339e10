#include "intervenidar/render/render.hpp"

#include <fstream>
#include <sstream>

#include "intervenidar/mdp/error.hpp"

namespace intervenidar::render {

using game::TilePos;

namespace {

void fill_tile(Frame& f, TilePos t, int px, std::uint8_t value) {
  for (int dy = 0; dy < px; ++dy)
    for (int dx = 0; dx < px; ++dx)
      f.pixels[static_cast<std::size_t>(t.y * px + dy) * f.width + (t.x * px + dx)] = value;
}

// Inner block of the tile; `mask` selects which interior pixels to paint:
// 0 = all, 1 = the "even" checker cells, 2 = the "odd" ones.
void fill_sprite(Frame& f, TilePos t, int px, std::uint8_t value, int mask) {
  const int lo = px >= 3 ? 1 : 0;
  const int hi = px >= 3 ? px - 1 : px;
  for (int dy = lo; dy < hi; ++dy) {
    for (int dx = lo; dx < hi; ++dx) {
      if (mask != 0 && ((dx + dy) % 2 == 0) != (mask == 1)) continue;
      f.pixels[static_cast<std::size_t>(t.y * px + dy) * f.width + (t.x * px + dx)] = value;
    }
  }
}

}  // namespace

Frame render(const game::GameState& state, const RenderConfig& config) {
  const auto& board = *state.board;
  const int px = config.tile_px;
  if (px <= 0) throw Error("render: tile size must be positive");
  Frame f;
  f.width = board.width() * px;
  f.height = board.height() * px;
  f.pixels.assign(static_cast<std::size_t>(f.width) * f.height, config.palette.background);
  for (std::size_t i = 0; i < board.tile_count(); ++i) {
    const TilePos t = board.position(i);
    if (!board.is_track(t)) continue;
    fill_tile(f, t, px, state.painted[i] ? config.palette.painted : config.palette.track);
  }
  for (const auto& e : state.enemies) {
    const int mask = e.position == state.player.position ? 2 : 0;
    fill_sprite(f, e.position, px, config.palette.enemy, mask);
  }
  const bool shared = std::any_of(state.enemies.begin(), state.enemies.end(),
                                  [&](const auto& e) { return e.position == state.player.position; });
  fill_sprite(f, state.player.position, px, config.palette.player, shared ? 1 : 0);
  return f;
}

Observation observe(std::span<const game::GameState> history, const RenderConfig& config) {
  if (history.empty()) throw Error("observe: history is empty");
  const std::size_t used = std::min<std::size_t>(history.size(), kStackDepth);
  const auto recent = history.subspan(history.size() - used);
  Observation obs;
  const std::size_t pad = kStackDepth - used;
  const Frame first = render(recent.front(), config);
  for (std::size_t i = 0; i < pad; ++i) obs.frames[i] = first;
  for (std::size_t i = 0; i < used; ++i) obs.frames[pad + i] = i == 0 ? first : render(recent[i], config);
  return obs;
}

void FrameStack::reset(const Frame& first) {
  frames_.fill(first);
  count_ = 1;
}

void FrameStack::push(Frame frame) {
  if (count_ == 0) {
    reset(frame);
    return;
  }
  for (int i = 0; i + 1 < kStackDepth; ++i) frames_[i] = std::move(frames_[i + 1]);
  frames_[kStackDepth - 1] = std::move(frame);
  ++count_;
}

Observation FrameStack::observation() const {
  if (count_ == 0) throw Error("FrameStack: no frames");
  return Observation{frames_};
}

std::string to_pgm(const Frame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
  return out;
}

Frame parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return std::string(bytes.substr(start, pos - start));
  };
  if (token() != "P5") throw FormatError("pgm: expected P5 magic");
  Frame f;
  try {
    f.width = std::stoi(token());
    f.height = std::stoi(token());
    if (std::stoi(token()) != 255) throw FormatError("pgm: only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw FormatError("pgm: malformed header");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
  if (bytes.size() < pos + n) throw FormatError("pgm: truncated pixel data");
  f.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return f;
}

void write_pgm(const Frame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_pgm(frame);
}

Frame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pgm(ss.str());
}

}  // namespace intervenidar::render
