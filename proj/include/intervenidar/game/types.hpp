#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace intervenidar::game {

struct TilePos {
  int x = 0;
  int y = 0;

  auto operator<=>(const TilePos&) const = default;
};

std::string to_string(TilePos p);

enum class Direction : std::uint8_t { kUp = 0, kRight = 1, kDown = 2, kLeft = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::kUp, Direction::kRight, Direction::kDown,
                                                      Direction::kLeft};

inline TilePos neighbor(TilePos p, Direction d) {
  switch (d) {
    case Direction::kUp: return {p.x, p.y - 1};
    case Direction::kRight: return {p.x + 1, p.y};
    case Direction::kDown: return {p.x, p.y + 1};
    case Direction::kLeft: return {p.x - 1, p.y};
  }
  return p;
}

inline Direction turn_left(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 3) % 4); }
inline Direction turn_right(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 1) % 4); }
inline Direction reverse(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 2) % 4); }

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

inline int manhattan(TilePos a, TilePos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
inline int chebyshev(TilePos a, TilePos b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

// The five movement actions.
enum class Action : int { kNoop = 0, kUp = 1, kRight = 2, kLeft = 3, kDown = 4 };
inline constexpr int kActionCount = 5;

inline std::optional<Direction> action_direction(Action a) {
  switch (a) {
    case Action::kUp: return Direction::kUp;
    case Action::kRight: return Direction::kRight;
    case Action::kLeft: return Direction::kLeft;
    case Action::kDown: return Direction::kDown;
    case Action::kNoop: return std::nullopt;
  }
  return std::nullopt;
}

inline Action direction_action(Direction d) {
  switch (d) {
    case Direction::kUp: return Action::kUp;
    case Direction::kRight: return Action::kRight;
    case Direction::kDown: return Action::kDown;
    case Direction::kLeft: return Action::kLeft;
  }
  return Action::kNoop;
}

}  // namespace intervenidar::game
