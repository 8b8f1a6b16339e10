#include "intervenidar/mdp/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "intervenidar/mdp/error.hpp"

namespace intervenidar::mdp {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "intervenidar-trajectory";

void require_finite(double v, std::string_view what) {
  if (!std::isfinite(v)) throw FormatError(std::string(what) + " must be finite");
}

json step_to_json(const TrajectoryStep& s) {
  json j;
  j["type"] = "step";
  j["state"] = s.state.hex();
  j["action"] = s.action;
  j["reward"] = s.reward;
  if (s.value) j["value"] = *s.value;
  if (s.q_values) j["q"] = *s.q_values;
  if (s.embedding) j["embedding"] = *s.embedding;
  return j;
}

TrajectoryStep step_from_json(const json& j) {
  TrajectoryStep s;
  s.state = Digest::from_hex(j.at("state").get<std::string>());
  s.action = j.at("action").get<int>();
  s.reward = j.at("reward").get<double>();
  require_finite(s.reward, "reward");
  if (j.contains("value")) {
    s.value = j["value"].get<double>();
    require_finite(*s.value, "value estimate");
  }
  if (j.contains("q")) s.q_values = j["q"].get<std::vector<double>>();
  if (j.contains("embedding")) s.embedding = j["embedding"].get<std::vector<double>>();
  return s;
}

}  // namespace

double Trajectory::total_reward() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

std::vector<int> Trajectory::actions() const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

std::string to_text(const Trajectory& t) {
  std::string out;
  json header;
  header["type"] = "header";
  header["format"] = kFormatName;
  header["version"] = t.format_version;
  header["env"] = t.env_id;
  header["config_hash"] = t.config_hash;
  header["seed"] = t.seed;
  header["start_label"] = t.start_label;
  header["start_digest"] = t.start_digest.hex();
  header["metadata"] = t.metadata;
  out += header.dump();
  out += '\n';
  for (const auto& s : t.steps) {
    require_finite(s.reward, "reward");
    out += step_to_json(s).dump();
    out += '\n';
  }
  json footer;
  footer["type"] = "footer";
  footer["steps"] = t.steps.size();
  footer["final_digest"] = t.final_digest.hex();
  footer["terminal"] = t.terminal;
  footer["aborted"] = t.aborted;
  if (t.aborted) footer["abort_reason"] = t.abort_reason;
  out += footer.dump();
  out += '\n';
  return out;
}

Trajectory parse_trajectory(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Trajectory t;
  bool have_header = false;
  bool have_footer = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_footer) throw FormatError("trajectory: content after footer at line " + std::to_string(line_no));
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("trajectory: line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const auto type = j.at("type").get<std::string>();
      if (!have_header) {
        if (type != "header" || j.at("format").get<std::string>() != kFormatName) {
          throw FormatError("trajectory: first line must be a header");
        }
        t.format_version = j.at("version").get<int>();
        if (t.format_version != kTrajectoryFormatVersion) {
          throw FormatError("trajectory: unsupported format version " + std::to_string(t.format_version));
        }
        t.env_id = j.at("env").get<std::string>();
        t.config_hash = j.at("config_hash").get<std::string>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.start_label = j.at("start_label").get<std::string>();
        t.start_digest = Digest::from_hex(j.at("start_digest").get<std::string>());
        t.metadata = j.at("metadata");
        have_header = true;
      } else if (type == "step") {
        t.steps.push_back(step_from_json(j));
      } else if (type == "footer") {
        if (j.at("steps").get<std::size_t>() != t.steps.size()) {
          throw FormatError("trajectory: footer step count does not match step lines");
        }
        t.final_digest = Digest::from_hex(j.at("final_digest").get<std::string>());
        t.terminal = j.at("terminal").get<bool>();
        t.aborted = j.at("aborted").get<bool>();
        if (t.aborted) t.abort_reason = j.value("abort_reason", "");
        have_footer = true;
      } else {
        throw FormatError("trajectory: unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError("trajectory: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError("trajectory: missing header");
  if (!have_footer) throw FormatError("trajectory: missing footer (truncated file?)");
  return t;
}

void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_text(trajectory);
  if (!out) throw Error("failed writing " + path.string());
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trajectory(ss.str());
}

}  // namespace intervenidar::mdp
