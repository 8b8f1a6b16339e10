#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/eval/distance.hpp"
#include "intervenidar/eval/metrics.hpp"
#include "intervenidar/game/config.hpp"
#include "intervenidar/interventions/interventions.hpp"

namespace intervenidar::eval {

enum class ConditionKind : std::uint8_t { kControl, kIntervention, kKopa, kAgentSwap, kHumanStart };

// One row of the evaluation suite.
//   control       canonical start state
//   intervention  `intervention` applied to the canonical start; unset
//                 count/shift are drawn per replicate by sample_condition
//   k-OPA         n on-policy steps of the evaluated agent + k random actions
//   AS            n steps of `source_agent`
//   HS            step n of every eligible session in `archive`
struct ConditionSpec {
  std::string label;
  ConditionKind kind = ConditionKind::kControl;
  std::optional<interventions::Intervention> intervention;
  bool sample_parameters = true;
  std::vector<int> n;
  int k = 0;
  std::string source_agent;
  std::filesystem::path archive;

  nlohmann::json to_json() const;
  static ConditionSpec from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  std::filesystem::path environment;
  std::string config_hash;  // optional; must match the environment file when set
  std::string agent = "builtin:random";
  std::uint64_t seed = 0;
  int replicates = 1;
  int max_steps = 5000;
  int max_retries = 25;
  int workers = 1;
  bool save_trajectories = false;
  std::filesystem::path output;
  std::vector<ConditionSpec> conditions;

  // Schema validation; throws FormatError naming the offending field.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// JSON Schema (draft 2020-12) describing the experiment file.
nlohmann::json experiment_schema();

// The default suite: control, the five interventions, k-OPA(10), k-OPA(20)
// and (when an archive/alternative is given) HS and AS over n = 100..900.
std::vector<ConditionSpec> default_conditions(const std::string& alternative_agent = {},
                                              const std::filesystem::path& archive = {});

struct ExperimentResult {
  std::vector<EvalRecord> records;
  SummaryTable summary;
  std::optional<DistanceReport> distances;
  std::size_t resumed = 0;  // records taken from an earlier partial run
};

struct RunOptions {
  // Stop after writing this many new records (simulated interruption).
  std::optional<std::size_t> stop_after;
  // Log sink for progress lines; may be empty.
  std::function<void(const std::string&)> log;
};

// Thrown by run_experiment when RunOptions::stop_after triggers.
class Interrupted : public Error {
 public:
  using Error::Error;
};

// Runs every condition and writes into config.output (created if missing):
//   records.jsonl   one EvalRecord per line, in task order
//   summary.csv     SummaryTable::to_csv()
//   distances.csv / density.csv   when the agent reports embeddings
//   trajectories/   when save_trajectories is set
// An existing records.jsonl is resumed: complete lines for the same tasks
// and seeds are kept, an incomplete trailing line is dropped.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Agent under evaluation is constructed from the spec once per worker.
using AgentMaker = std::function<bridge::AgentPtr(const std::string& spec)>;
ExperimentResult run_experiment(const ExperimentConfig& config, const game::ConfigPtr& env_config,
                                const AgentMaker& make, const RunOptions& options = {});

}  // namespace intervenidar::eval
