#include "intervenidar/eval/experiment.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "intervenidar/bridge/factory.hpp"
#include "intervenidar/game/env.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/mdp/rng.hpp"
#include "intervenidar/stategen/state_gen.hpp"

namespace intervenidar::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kExperimentFormat = "intervenidar-experiment";
constexpr int kExperimentVersion = 1;
// Control trajectories contribute every k-th step embedding to the
// "training" set of the distance report.
constexpr std::size_t kEmbeddingStride = 10;

struct KindName {
  ConditionKind kind;
  const char* name;
};
constexpr KindName kKindNames[] = {{ConditionKind::kControl, "control"},
                                   {ConditionKind::kIntervention, "intervention"},
                                   {ConditionKind::kKopa, "k-OPA"},
                                   {ConditionKind::kAgentSwap, "AS"},
                                   {ConditionKind::kHumanStart, "HS"}};

std::string kind_name(ConditionKind k) {
  for (const auto& e : kKindNames)
    if (e.kind == k) return e.name;
  return "?";
}

ConditionKind kind_from_name(const std::string& s) {
  for (const auto& e : kKindNames)
    if (s == e.name) return e.kind;
  throw FormatError("experiment: unknown condition kind '" + s + "'");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError("experiment: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw FormatError("experiment: unknown field '" + key + "' in " + where);
  }
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError("experiment: field '" + std::string(key) + "' in " + where + " is missing or has the wrong type");
  }
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where, T fallback) {
  return j.contains(key) ? get_field<T>(j, key, where) : fallback;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("write failed for " + path.string());
}

}  // namespace

json ConditionSpec::to_json() const {
  json j = {{"label", label}, {"kind", kind_name(kind)}};
  if (intervention) {
    json iv = {{"kind", interventions::to_string(intervention->kind)}};
    if (!sample_parameters) {
      const json full = intervention->to_json();
      if (full.contains("count")) iv["count"] = full["count"];
      if (full.contains("shift")) iv["shift"] = full["shift"];
    }
    j["intervention"] = iv;
  }
  if (!n.empty()) j["n"] = n;
  if (kind == ConditionKind::kKopa) j["k"] = k;
  if (!source_agent.empty()) j["agent"] = source_agent;
  if (!archive.empty()) j["archive"] = archive.string();
  return j;
}

ConditionSpec ConditionSpec::from_json(const json& j) {
  check_keys(j, {"label", "kind", "intervention", "n", "k", "agent", "archive"}, "condition");
  ConditionSpec c;
  c.label = get_field<std::string>(j, "label", "condition");
  const std::string where = "condition '" + c.label + "'";
  if (c.label.empty() || c.label.find_first_of(",\n\"") != std::string::npos) {
    throw FormatError("experiment: condition labels must be non-empty and free of commas, quotes and newlines");
  }
  c.kind = kind_from_name(get_field<std::string>(j, "kind", where));
  switch (c.kind) {
    case ConditionKind::kControl: break;
    case ConditionKind::kIntervention: {
      const json& iv = j.contains("intervention") ? j["intervention"] : json();
      check_keys(iv, {"kind", "count", "shift"}, where + " intervention");
      interventions::Intervention parsed;
      try {
        parsed.kind = interventions::kind_from_string(get_field<std::string>(iv, "kind", where));
      } catch (const interventions::InterventionError& e) {
        throw FormatError(std::string("experiment: ") + e.what());
      }
      c.sample_parameters = !iv.contains("count") && !iv.contains("shift");
      parsed.count = get_field<int>(iv, "count", where, 1);
      parsed.shift = get_field<int>(iv, "shift", where, 1);
      try {
        parsed.validate();
      } catch (const interventions::InterventionError& e) {
        throw FormatError(std::string("experiment: ") + e.what());
      }
      c.intervention = parsed;
      break;
    }
    case ConditionKind::kKopa:
    case ConditionKind::kAgentSwap:
    case ConditionKind::kHumanStart: {
      c.n = get_field<std::vector<int>>(j, "n", where,
                                        std::vector<int>(std::begin(stategen::kDefaultPrefixLengths),
                                                         std::end(stategen::kDefaultPrefixLengths)));
      for (int n : c.n)
        if (n < 0) throw FormatError("experiment: negative n in " + where);
      if (c.kind == ConditionKind::kKopa) {
        c.k = get_field<int>(j, "k", where);
        if (c.k < 0) throw FormatError("experiment: negative k in " + where);
      }
      if (c.kind == ConditionKind::kAgentSwap) c.source_agent = get_field<std::string>(j, "agent", where);
      if (c.kind == ConditionKind::kHumanStart) c.archive = get_field<std::string>(j, "archive", where);
      break;
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  check_keys(j,
             {"format", "version", "environment", "config_hash", "agent", "seed", "replicates", "max_steps",
              "max_retries", "workers", "save_trajectories", "output", "conditions"},
             "experiment");
  if (get_field<std::string>(j, "format", "experiment") != kExperimentFormat) {
    throw FormatError("experiment: format must be \"intervenidar-experiment\"");
  }
  if (get_field<int>(j, "version", "experiment") != kExperimentVersion) {
    throw FormatError("experiment: unsupported version");
  }
  ExperimentConfig c;
  c.environment = resolve(base_dir, get_field<std::string>(j, "environment", "experiment"));
  c.config_hash = get_field<std::string>(j, "config_hash", "experiment", "");
  c.agent = get_field<std::string>(j, "agent", "experiment", c.agent);
  c.seed = get_field<std::uint64_t>(j, "seed", "experiment", 0);
  c.replicates = get_field<int>(j, "replicates", "experiment", 1);
  c.max_steps = get_field<int>(j, "max_steps", "experiment", c.max_steps);
  c.max_retries = get_field<int>(j, "max_retries", "experiment", c.max_retries);
  c.workers = get_field<int>(j, "workers", "experiment", 1);
  c.save_trajectories = get_field<bool>(j, "save_trajectories", "experiment", false);
  c.output = resolve(base_dir, get_field<std::string>(j, "output", "experiment"));
  if (c.replicates < 1) throw FormatError("experiment: replicates must be >= 1");
  if (c.max_steps < 1) throw FormatError("experiment: max_steps must be >= 1");
  if (c.max_retries < 1) throw FormatError("experiment: max_retries must be >= 1");
  if (c.workers < 1) throw FormatError("experiment: workers must be >= 1");
  if (!j.contains("conditions") || !j["conditions"].is_array() || j["conditions"].empty()) {
    throw FormatError("experiment: conditions must be a non-empty array");
  }
  std::set<std::string> labels;
  for (const auto& cj : j["conditions"]) {
    auto cond = ConditionSpec::from_json(cj);
    cond.archive = resolve(base_dir, cond.archive);
    if (!labels.insert(cond.label).second) throw FormatError("experiment: duplicate condition label '" + cond.label + "'");
    c.conditions.push_back(std::move(cond));
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open experiment config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("experiment: " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

json ExperimentConfig::to_json() const {
  json conds = json::array();
  for (const auto& c : conditions) conds.push_back(c.to_json());
  json j = {{"format", kExperimentFormat}, {"version", kExperimentVersion}, {"environment", environment.string()},
            {"agent", agent},           {"seed", seed},                 {"replicates", replicates},
            {"max_steps", max_steps},   {"max_retries", max_retries},   {"workers", workers},
            {"save_trajectories", save_trajectories}, {"output", output.string()}, {"conditions", conds}};
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j;
}

json experiment_schema() {
  const json n_list = {{"type", "array"}, {"items", {{"type", "integer"}, {"minimum", 0}}}};
  const json condition = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"label", "kind"}},
      {"properties",
       {{"label", {{"type", "string"}, {"minLength", 1}}},
        {"kind", {{"enum", {"control", "intervention", "k-OPA", "AS", "HS"}}}},
        {"intervention",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"kind"}},
          {"properties",
           {{"kind", {{"enum", {"ER", "ES", "ALS", "FLS", "PRS"}}}},
            {"count", {{"type", "integer"}, {"minimum", 1}, {"maximum", 4}}},
            {"shift", {{"type", "integer"}, {"minimum", 1}, {"maximum", 20}}}}}}},
        {"n", n_list},
        {"k", {{"type", "integer"}, {"minimum", 0}}},
        {"agent", {{"type", "string"}}},
        {"archive", {{"type", "string"}}}}}};
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "intervenidar experiment"},
          {"type", "object"},
          {"additionalProperties", false},
          {"required", {"format", "version", "environment", "output", "conditions"}},
          {"properties",
           {{"format", {{"const", kExperimentFormat}}},
            {"version", {{"const", kExperimentVersion}}},
            {"environment", {{"type", "string"}, {"description", "board config, relative to this file"}}},
            {"config_hash", {{"type", "string"}, {"pattern", "^[0-9a-f]{64}$"}}},
            {"agent", {{"type", "string"}, {"description", "builtin:<name>, exec:<command> or tcp:<host>:<port>"}}},
            {"seed", {{"type", "integer"}, {"minimum", 0}}},
            {"replicates", {{"type", "integer"}, {"minimum", 1}}},
            {"max_steps", {{"type", "integer"}, {"minimum", 1}}},
            {"max_retries", {{"type", "integer"}, {"minimum", 1}}},
            {"workers", {{"type", "integer"}, {"minimum", 1}}},
            {"save_trajectories", {{"type", "boolean"}}},
            {"output", {{"type", "string"}, {"description", "output directory, relative to this file"}}},
            {"conditions", {{"type", "array"}, {"minItems", 1}, {"items", condition}}}}}};
}

std::vector<ConditionSpec> default_conditions(const std::string& alternative_agent, const fs::path& archive) {
  std::vector<ConditionSpec> out;
  const std::vector<int> ns(std::begin(stategen::kDefaultPrefixLengths), std::end(stategen::kDefaultPrefixLengths));
  out.push_back({"control", ConditionKind::kControl, std::nullopt, true, {}, 0, {}, {}});
  for (auto kind : interventions::kAllKinds) {
    interventions::Intervention iv;
    iv.kind = kind;
    out.push_back({interventions::to_string(kind), ConditionKind::kIntervention, iv, true, {}, 0, {}, {}});
  }
  for (int k : stategen::kDefaultRandomActions)
    out.push_back({"k-OPA(" + std::to_string(k) + ")", ConditionKind::kKopa, std::nullopt, true, ns, k, {}, {}});
  if (!alternative_agent.empty())
    out.push_back({"AS", ConditionKind::kAgentSwap, std::nullopt, true, ns, 0, alternative_agent, {}});
  if (!archive.empty()) out.push_back({"HS", ConditionKind::kHumanStart, std::nullopt, true, ns, 0, {}, archive});
  return out;
}

namespace {

struct Task {
  std::size_t index = 0;
  const ConditionSpec* condition = nullptr;
  int n = 0;
  std::string entry;  // HS archive entry
  std::uint64_t seed = 0;
  std::string detail;
  std::string infeasible;  // set when the task cannot even be attempted
};

std::vector<Task> enumerate_tasks(const ExperimentConfig& config, const game::ConfigPtr& env_config) {
  std::vector<Task> tasks;
  for (const auto& cond : config.conditions) {
    std::size_t ordinal = 0;
    auto add = [&](int n, std::string entry, std::string detail) {
      Task t;
      t.index = tasks.size();
      t.condition = &cond;
      t.n = n;
      t.entry = std::move(entry);
      t.seed = mdp::derive_seed(config.seed, cond.label + "/" + std::to_string(ordinal++));
      t.detail = std::move(detail);
      tasks.push_back(std::move(t));
    };
    switch (cond.kind) {
      case ConditionKind::kControl:
      case ConditionKind::kIntervention:
        for (int r = 0; r < config.replicates; ++r) add(0, {}, "replicate=" + std::to_string(r));
        break;
      case ConditionKind::kKopa:
      case ConditionKind::kAgentSwap:
        for (int n : cond.n)
          for (int r = 0; r < config.replicates; ++r)
            add(n, {}, "n=" + std::to_string(n) + " replicate=" + std::to_string(r));
        break;
      case ConditionKind::kHumanStart: {
        stategen::HumanPlayArchive archive(cond.archive);
        std::vector<stategen::ArchiveEntry> usable;
        for (const auto& e : archive.eligible())
          if (e.config_hash == env_config->hash()) usable.push_back(e);
        if (usable.empty()) {
          add(0, {}, "no eligible sessions");
          tasks.back().infeasible = "archive " + cond.archive.string() + " has no eligible sessions for this config";
          break;
        }
        for (const auto& e : usable)
          for (int n : cond.n) add(n, e.id, e.id + " n=" + std::to_string(n));
        break;
      }
    }
  }
  return tasks;
}

// Per-worker state: the evaluated agent and any alternative agents.
struct Worker {
  const ExperimentConfig& config;
  game::ConfigPtr env_config;
  const AgentMaker& make;
  bridge::AgentPtr agent;
  std::map<std::string, bridge::AgentPtr> alternatives;

  bridge::Agent& alternative(const std::string& spec) {
    auto& slot = alternatives[spec];
    if (!slot) slot = make(spec);
    return *slot;
  }

  EvalRecord run(const Task& task, std::optional<std::vector<std::vector<double>>>& embeddings) {
    const ConditionSpec& cond = *task.condition;
    EvalRecord rec;
    rec.task = task.index;
    rec.condition = cond.label;
    rec.detail = task.detail;
    rec.seed = task.seed;
    if (!task.infeasible.empty()) {
      rec.status = "infeasible";
      rec.reason = task.infeasible;
      return rec;
    }

    stategen::GenerationOptions gen;
    gen.max_retries = config.max_retries;
    game::GameState start = game::new_game(env_config);
    try {
      switch (cond.kind) {
        case ConditionKind::kControl: break;
        case ConditionKind::kIntervention: {
          interventions::Intervention iv = *cond.intervention;
          if (cond.sample_parameters) iv = interventions::sample_condition(iv.kind, task.seed, *env_config);
          iv.seed = task.seed;
          auto applied = interventions::apply(start, iv);
          start = std::move(applied.state);
          rec.origin = applied.report.to_json();
          break;
        }
        case ConditionKind::kKopa: {
          auto g = stategen::kopa_state(*agent, env_config, task.n, cond.k, task.seed, gen);
          start = std::move(g.state);
          rec.origin = g.provenance.to_json();
          break;
        }
        case ConditionKind::kAgentSwap: {
          auto g = stategen::agent_swap_state(alternative(cond.source_agent), agent->id(), env_config, task.n,
                                              task.seed, gen);
          start = std::move(g.state);
          rec.origin = g.provenance.to_json();
          break;
        }
        case ConditionKind::kHumanStart: {
          stategen::HumanPlayArchive archive(cond.archive);
          auto g = stategen::human_start_state(archive, task.entry, task.n, env_config);
          start = std::move(g.state);
          rec.origin = g.provenance.to_json();
          break;
        }
      }
    } catch (const interventions::InfeasibleError& e) {
      rec.status = "infeasible";
      rec.reason = e.what();
      return rec;
    } catch (const stategen::InfeasibleError& e) {
      rec.status = "infeasible";
      rec.reason = e.what();
      return rec;
    }

    game::IntervenidarEnv env(env_config);
    env.set_start_state(std::move(start));
    bridge::AgentPolicy policy(*agent);
    auto t = mdp::run_episode(env, policy, {mdp::derive_seed(task.seed, "eval"), config.max_steps, cond.label});
    rec.tar = tar(t);
    rec.length = t.steps.size();
    rec.start_digest = t.start_digest.hex();
    rec.vee = vee_series(t);
    if (!t.steps.empty() && t.steps.front().embedding) rec.start_embedding = t.steps.front().embedding;
    if (t.aborted) {
      rec.status = "aborted";
      rec.reason = t.abort_reason;
    }
    if (cond.kind == ConditionKind::kControl) {
      std::vector<std::vector<double>> seen;
      for (std::size_t i = 0; i < t.steps.size(); i += kEmbeddingStride)
        if (t.steps[i].embedding) seen.push_back(*t.steps[i].embedding);
      if (!seen.empty()) embeddings = std::move(seen);
    }
    if (config.save_trajectories) {
      t.metadata["condition"] = cond.label;
      t.metadata["detail"] = task.detail;
      t.metadata["origin"] = rec.origin;
      char name[48];
      std::snprintf(name, sizeof name, "task-%06zu.jsonl", task.index);
      mdp::save_trajectory(t, config.output / "trajectories" / name);
    }
    return rec;
  }
};

// Complete lines of an earlier records file that match the task list.
std::vector<json> load_partial(const fs::path& path, const std::vector<Task>& tasks) {
  std::vector<json> kept;
  if (!fs::exists(path)) return kept;
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // incomplete trailing line
    json j;
    try {
      j = json::parse(text.substr(pos, nl - pos));
    } catch (const json::exception&) {
      break;
    }
    const auto rec = EvalRecord::from_json(j);
    if (rec.task != kept.size() || rec.task >= tasks.size() || rec.seed != tasks[rec.task].seed ||
        rec.condition != tasks[rec.task].condition->label) {
      throw FormatError("records file " + path.string() + " belongs to a different experiment; use a fresh output directory");
    }
    kept.push_back(std::move(j));
    pos = nl + 1;
  }
  return kept;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const game::ConfigPtr& env_config,
                                const AgentMaker& make, const RunOptions& options) {
  if (!config.config_hash.empty() && config.config_hash != env_config->hash()) {
    throw ConfigMismatchError("experiment: config_hash " + config.config_hash + " does not match " +
                              config.environment.string() + " (" + env_config->hash() + ")");
  }
  fs::create_directories(config.output);
  if (config.save_trajectories) fs::create_directories(config.output / "trajectories");

  const auto tasks = enumerate_tasks(config, env_config);
  const fs::path records_path = config.output / "records.jsonl";
  const auto previous = load_partial(records_path, tasks);

  ExperimentResult result;
  result.resumed = previous.size();
  std::vector<std::optional<EvalRecord>> done(tasks.size());
  std::vector<std::optional<std::vector<std::vector<double>>>> embeddings(tasks.size());
  {
    std::string text;
    for (std::size_t i = 0; i < previous.size(); ++i) {
      done[i] = EvalRecord::from_json(previous[i]);
      text += previous[i].dump() + '\n';
      if (previous[i].contains("training_embeddings"))
        embeddings[i] = previous[i]["training_embeddings"].get<std::vector<std::vector<double>>>();
    }
    write_file(records_path, text);  // drops any torn trailing line
  }

  std::ofstream out(records_path, std::ios::binary | std::ios::app);
  std::mutex mutex;
  std::size_t next_to_write = previous.size();
  std::size_t written = 0;
  std::atomic<std::size_t> next_task{previous.size()};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  bool interrupted = false;

  auto flush_ready = [&] {
    while (next_to_write < tasks.size() && done[next_to_write]) {
      json j = done[next_to_write]->to_json();
      if (embeddings[next_to_write]) j["training_embeddings"] = *embeddings[next_to_write];
      out << j.dump() << '\n';
      out.flush();
      if (options.log) {
        const auto& r = *done[next_to_write];
        options.log("[" + std::to_string(next_to_write + 1) + "/" + std::to_string(tasks.size()) + "] " +
                    r.condition + " " + r.detail + " " + r.status + " tar=" + format_real(r.tar));
      }
      ++next_to_write;
      ++written;
      if (options.stop_after && written >= *options.stop_after) {
        interrupted = true;
        stop = true;
        return;
      }
    }
  };

  auto work = [&] {
    try {
      Worker worker{config, env_config, make, make(config.agent), {}};
      for (;;) {
        if (stop) return;
        const std::size_t i = next_task++;
        if (i >= tasks.size()) return;
        std::optional<std::vector<std::vector<double>>> emb;
        EvalRecord rec = worker.run(tasks[i], emb);
        std::lock_guard lock(mutex);
        done[i] = std::move(rec);
        embeddings[i] = std::move(emb);
        if (!interrupted) flush_ready();
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(tasks.size() - previous.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  out.close();
  if (failure) std::rethrow_exception(failure);
  if (interrupted) throw Interrupted("experiment interrupted after " + std::to_string(written) + " new records");

  std::map<std::string, std::vector<Vector>> eval_embeddings;
  std::vector<Vector> training;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const EvalRecord& r = *done[i];
    result.records.push_back(r);
    if (embeddings[i]) training.insert(training.end(), embeddings[i]->begin(), embeddings[i]->end());
    if (r.ok() && r.start_embedding && tasks[i].condition->kind != ConditionKind::kControl)
      eval_embeddings[r.condition].push_back(*r.start_embedding);
  }
  result.summary = summarize(result.records);
  write_file(config.output / "summary.csv", result.summary.to_csv());
  if (!training.empty() && !eval_embeddings.empty()) {
    result.distances = embedding_distance_report(eval_embeddings, training);
    write_file(config.output / "distances.csv", quantiles_csv(*result.distances));
    write_file(config.output / "density.csv", density_csv(*result.distances));
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto env_config = game::load_config(config.environment);
  return run_experiment(
      config, env_config, [](const std::string& spec) { return bridge::make_agent(spec); }, options);
}

}  // namespace intervenidar::eval
