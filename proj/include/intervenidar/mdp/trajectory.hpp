#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "intervenidar/mdp/digest.hpp"

namespace intervenidar::mdp {

inline constexpr int kTrajectoryFormatVersion = 1;

struct TrajectoryStep {
  Digest state;  // digest of s_t, the state the action was taken in
  int action = 0;
  double reward = 0.0;
  std::optional<double> value;
  std::optional<std::vector<double>> q_values;
  std::optional<std::vector<double>> embedding;

  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  int format_version = kTrajectoryFormatVersion;
  std::string env_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string start_label;
  Digest start_digest;
  // Free-form metadata: intervention reports, player ids, timestamps, ...
  nlohmann::json metadata = nlohmann::json::object();

  std::vector<TrajectoryStep> steps;
  Digest final_digest;
  bool terminal = false;
  bool aborted = false;
  std::string abort_reason;

  double total_reward() const;
  std::vector<int> actions() const;

  bool operator==(const Trajectory&) const = default;
};

// One JSON object per line: a header line, one line per step, a footer line.
// Keys are emitted in sorted order and doubles in shortest round-trip form, so
// to_text(parse_trajectory(s)) == s for any s produced by to_text.
std::string to_text(const Trajectory& trajectory);
Trajectory parse_trajectory(std::string_view text);

void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

}  // namespace intervenidar::mdp
