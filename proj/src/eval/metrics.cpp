#include "intervenidar/eval/metrics.hpp"

#include <charconv>
#include <cmath>

#include "intervenidar/mdp/error.hpp"

namespace intervenidar::eval {

using nlohmann::json;

double tar(const mdp::Trajectory& trajectory) {
  double sum = 0.0;
  for (const auto& s : trajectory.steps) sum += s.reward;
  return sum;
}

std::optional<std::vector<double>> vee_series(const mdp::Trajectory& trajectory) {
  const auto& steps = trajectory.steps;
  for (const auto& s : steps)
    if (!s.value) return std::nullopt;
  std::vector<double> out(steps.size());
  double to_go = 0.0;
  for (std::size_t i = steps.size(); i-- > 0;) {
    to_go += steps[i].reward;
    out[i] = *steps[i].value - to_go;
  }
  return out;
}

std::optional<double> EvalRecord::start_vee() const {
  if (!vee || vee->empty()) return std::nullopt;
  return vee->front();
}

json EvalRecord::to_json() const {
  json j = {{"task", task},       {"condition", condition}, {"detail", detail},
            {"seed", seed},       {"status", status},       {"tar", tar},
            {"length", length},   {"start_digest", start_digest}, {"origin", origin}};
  if (!reason.empty()) j["reason"] = reason;
  j["vee"] = vee ? json(*vee) : json(nullptr);
  if (start_embedding) j["start_embedding"] = *start_embedding;
  return j;
}

EvalRecord EvalRecord::from_json(const json& j) {
  try {
    EvalRecord r;
    r.task = j.at("task").get<std::size_t>();
    r.condition = j.at("condition").get<std::string>();
    r.detail = j.at("detail").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.reason = j.value("reason", std::string{});
    r.tar = j.at("tar").get<double>();
    r.length = j.at("length").get<std::size_t>();
    r.start_digest = j.at("start_digest").get<std::string>();
    r.origin = j.value("origin", json::object());
    if (!j.at("vee").is_null()) r.vee = j["vee"].get<std::vector<double>>();
    if (j.contains("start_embedding")) r.start_embedding = j["start_embedding"].get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("eval record: ") + e.what());
  }
}

const ConditionSummary* SummaryTable::find(const std::string& condition) const {
  for (const auto& r : rows)
    if (r.condition == condition) return &r;
  return nullptr;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string SummaryTable::to_csv() const {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("NA"); };
  std::string out =
      "condition,completed,aborted,infeasible,mean_tar,sd_tar,normalized_tar,mean_vee,normalized_vee,complete\n";
  for (const auto& r : rows) {
    out += r.condition + ',' + std::to_string(r.completed) + ',' + std::to_string(r.aborted) + ',' +
           std::to_string(r.infeasible) + ',' + opt(r.mean_tar) + ',' + opt(r.sd_tar) + ',' + opt(r.normalized_tar) +
           ',' + opt(r.mean_vee) + ',' + opt(r.normalized_vee) + ',' + (r.complete() ? "yes" : "no") + '\n';
  }
  return out;
}

SummaryTable summarize(const std::vector<EvalRecord>& records, const std::string& control) {
  SummaryTable table;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> tars;
  std::vector<std::vector<double>> vees;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.condition, table.rows.size());
    if (inserted) {
      table.rows.push_back({});
      table.rows.back().condition = r.condition;
      tars.emplace_back();
      vees.emplace_back();
    }
    auto& row = table.rows[it->second];
    if (r.status == "aborted") {
      ++row.aborted;
    } else if (r.status == "infeasible") {
      ++row.infeasible;
    } else {
      ++row.completed;
      tars[it->second].push_back(r.tar);
      if (const auto v = r.start_vee()) vees[it->second].push_back(*v);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto& row = table.rows[i];
    if (!tars[i].empty()) {
      row.mean_tar = mean(tars[i]);
      if (tars[i].size() >= 2) {
        double ss = 0.0;
        for (double x : tars[i]) ss += (x - *row.mean_tar) * (x - *row.mean_tar);
        row.sd_tar = std::sqrt(ss / static_cast<double>(tars[i].size() - 1));
      }
    }
    // Only defined when every completed episode reported value estimates.
    if (!vees[i].empty() && vees[i].size() == tars[i].size()) {
      row.mean_vee = mean(vees[i]);
      if (row.mean_tar && *row.mean_tar != 0.0) row.normalized_vee = *row.mean_vee / *row.mean_tar;
    }
  }
  const ConditionSummary* base = table.find(control);
  if (base && base->mean_tar && *base->mean_tar != 0.0) {
    const double denom = *base->mean_tar;
    for (auto& row : table.rows)
      if (row.mean_tar) row.normalized_tar = row.condition == control ? 1.0 : *row.mean_tar / denom;
  }
  return table;
}

}  // namespace intervenidar::eval
