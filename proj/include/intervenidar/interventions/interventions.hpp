#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/game/game.hpp"
#include "intervenidar/mdp/digest.hpp"

namespace intervenidar::interventions {

enum class Kind : std::uint8_t {
  kEnemyRemoval,       // ER
  kEnemyShift,         // ES
  kAddLineSegment,     // ALS
  kFillLineSegments,   // FLS
  kPlayerRandomStart,  // PRS
};

inline constexpr Kind kAllKinds[] = {Kind::kEnemyRemoval, Kind::kEnemyShift, Kind::kAddLineSegment,
                                     Kind::kFillLineSegments, Kind::kPlayerRandomStart};

// Short label ("ER", "ES", ...). kind_from_string also accepts the long
// names ("enemy-removal", ...), case-insensitively.
std::string to_string(Kind kind);
Kind kind_from_string(const std::string& s);

// Parameter ranges.
inline constexpr int kMinRemovals = 1, kMaxRemovals = 4;
inline constexpr int kMinShift = 1, kMaxShift = 20;
inline constexpr int kMinFills = 1, kMaxFills = 4;
// Chebyshev distance the relocated player keeps from every enemy: 2 leaves at
// least one free tile between them in every direction.
inline constexpr int kPlayerBuffer = 2;

class InterventionError : public Error {
 public:
  using Error::Error;
};

// No valid placement exists for the requested intervention in this state.
class InfeasibleError : public InterventionError {
 public:
  using InterventionError::InterventionError;
};

// A declarative intervention. `count` is the number of enemies removed (ER)
// or segments filled (FLS); `shift` is the ES step count. The random choices
// (which enemy, which segments, where) are drawn from `seed`'s
// "intervention" stream when the intervention is applied.
struct Intervention {
  Kind kind = Kind::kEnemyRemoval;
  int count = 1;
  int shift = 1;
  std::uint64_t seed = 0;

  // Throws InterventionError when a parameter is outside its range.
  void validate() const;

  nlohmann::json to_json() const;
  static Intervention from_json(const nlohmann::json& j);

  bool operator==(const Intervention&) const = default;
};

struct InterventionReport {
  Intervention intervention;
  // The random choices made: removed enemy indices, shifted enemy, new
  // segment placement, filled segment ids, player tile.
  nlohmann::json resolved = nlohmann::json::object();
  mdp::Digest pre_digest;
  mdp::Digest post_digest;
  // Names of the post-conditions that were re-checked on the result.
  std::vector<std::string> checks;

  nlohmann::json to_json() const;
};

struct Applied {
  game::GameState state;
  InterventionReport report;
};

// Applies `iv` to a start state (step 0). Deterministic in (state, iv).
// Throws InterventionError for a non-start state or invalid parameters and
// InfeasibleError when no placement exists; the input is never modified.
Applied apply(const game::GameState& state, const Intervention& iv);

// Draws parameters uniformly from their ranges using `seed`'s
// "intervention-params" stream; the returned intervention carries `seed`.
Intervention sample_condition(Kind kind, std::uint64_t seed, const game::GameConfig& base);

// A vertical run that ALS can add: both ends are existing intersections on
// horizontal track, the tiles in between and beside it are empty.
struct Placement {
  int column = 0;
  int top = 0;
  int bottom = 0;

  bool operator==(const Placement&) const = default;
};
std::vector<Placement> als_candidates(const game::Board& board);

// Structural sanity of a state: valid board, entities on track, paint/fill
// bookkeeping consistent, no enemy on the player. Returns the violations
// found (empty when the state is valid).
std::vector<std::string> state_violations(const game::GameState& state);

struct Verdict {
  bool unreachable = false;
  std::string justification;
};

// Sound static checks that `state` cannot be reached from the canonical
// start of `base` by any action sequence. Returns unreachable=false with
// justification "unknown" when no check applies.
Verdict verify_unreachable(const game::GameState& state, const game::GameConfig& base);

}  // namespace intervenidar::interventions
