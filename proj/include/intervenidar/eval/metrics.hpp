#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/mdp/trajectory.hpp"

namespace intervenidar::eval {

// Undiscounted sum of the recorded rewards.
double tar(const mdp::Trajectory& trajectory);

// v̂(s_t) minus the realised return after step t (sum of r_t .. r_end), for
// every step. nullopt when any step lacks a value estimate: the metric is
// unavailable, not zero.
std::optional<std::vector<double>> vee_series(const mdp::Trajectory& trajectory);

struct EvalRecord {
  std::size_t task = 0;  // position in the experiment's task list
  std::string condition;
  std::string detail;  // e.g. "n=300", resolved intervention summary
  std::uint64_t seed = 0;
  // "ok", "aborted" (agent/protocol failure) or "infeasible" (no start state)
  std::string status = "ok";
  std::string reason;
  double tar = 0.0;
  std::size_t length = 0;
  std::string start_digest;
  std::optional<std::vector<double>> vee;
  // First embedding the agent reported (at the start state), if any.
  std::optional<std::vector<double>> start_embedding;
  nlohmann::json origin = nlohmann::json::object();  // provenance / intervention report

  bool ok() const { return status == "ok"; }
  // VEE at the evaluation's start state.
  std::optional<double> start_vee() const;

  nlohmann::json to_json() const;
  static EvalRecord from_json(const nlohmann::json& j);
};

struct ConditionSummary {
  std::string condition;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  std::size_t infeasible = 0;
  std::optional<double> mean_tar;
  std::optional<double> sd_tar;  // sample standard deviation, n >= 2
  std::optional<double> normalized_tar;
  std::optional<double> mean_vee;
  // mean VEE divided by the condition's own mean TAR; undefined when that
  // TAR is 0 or no value estimates were reported.
  std::optional<double> normalized_vee;

  bool complete() const { return aborted == 0 && infeasible == 0; }
};

struct SummaryTable {
  std::vector<ConditionSummary> rows;  // in first-appearance order

  const ConditionSummary* find(const std::string& condition) const;
  // Comma-separated, header first, "NA" for undefined values.
  std::string to_csv() const;
};

// Aggregates records by condition. Only "ok" records enter the means. TAR is
// normalised by the mean TAR of `control` (undefined if absent or zero).
SummaryTable summarize(const std::vector<EvalRecord>& records, const std::string& control = "control");

// Shortest decimal that round-trips.
std::string format_real(double v);

}  // namespace intervenidar::eval
