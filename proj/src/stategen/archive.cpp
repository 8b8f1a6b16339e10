#include "intervenidar/stategen/archive.hpp"

#include <cstdio>
#include <fstream>

#include "intervenidar/game/env.hpp"
#include "intervenidar/mdp/episode.hpp"

namespace intervenidar::stategen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kIndexFormat = "intervenidar-archive";
constexpr int kIndexVersion = 1;

void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("archive: cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw Error("archive: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

json ArchiveEntry::to_json() const {
  json j = {{"id", id},           {"player", player}, {"length", length}, {"config_hash", config_hash},
            {"seed", seed},       {"eligible", eligible}, {"status", status}};
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

ArchiveEntry ArchiveEntry::from_json(const json& j) {
  ArchiveEntry e;
  e.id = j.at("id").get<std::string>();
  e.player = j.at("player").get<std::string>();
  e.length = j.at("length").get<std::size_t>();
  e.config_hash = j.at("config_hash").get<std::string>();
  e.seed = j.value("seed", std::uint64_t{0});
  e.eligible = j.at("eligible").get<bool>();
  e.status = j.at("status").get<std::string>();
  e.reason = j.value("reason", std::string{});
  if (e.status != "ok" && e.status != "tombstoned") throw FormatError("archive: unknown status '" + e.status + "'");
  return e;
}

HumanPlayArchive::HumanPlayArchive(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const fs::path index = dir_ / "index.json";
  if (!fs::exists(index)) return;
  std::ifstream in(index, std::ios::binary);
  try {
    const json j = json::parse(in);
    if (j.at("format") != kIndexFormat) throw FormatError("archive: " + index.string() + " is not an archive index");
    if (j.at("version").get<int>() != kIndexVersion) throw FormatError("archive: unsupported index version");
    for (const auto& e : j.at("entries")) entries_.push_back(ArchiveEntry::from_json(e));
  } catch (const json::exception& e) {
    throw FormatError("archive: malformed index " + index.string() + ": " + e.what());
  }
}

std::vector<ArchiveEntry> HumanPlayArchive::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::optional<ArchiveEntry> HumanPlayArchive::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries_)
    if (e.id == id) return e;
  return std::nullopt;
}

std::vector<ArchiveEntry> HumanPlayArchive::eligible() const {
  std::lock_guard lock(mutex_);
  std::vector<ArchiveEntry> out;
  for (const auto& e : entries_)
    if (e.ok() && e.eligible) out.push_back(e);
  return out;
}

fs::path HumanPlayArchive::entry_path(const std::string& id) const { return dir_ / (id + ".jsonl"); }

void HumanPlayArchive::write_index() const {
  json entries = json::array();
  for (const auto& e : entries_) entries.push_back(e.to_json());
  const json j = {{"format", kIndexFormat}, {"version", kIndexVersion}, {"entries", entries}};
  write_atomically(dir_ / "index.json", j.dump(2) + "\n");
}

ArchiveEntry HumanPlayArchive::append(const mdp::Trajectory& trajectory, const std::string& player,
                                      const game::ConfigPtr& config) {
  if (trajectory.config_hash != config->hash()) {
    throw ConfigMismatchError("archive: session recorded for config " + trajectory.config_hash +
                              ", archive config is " + config->hash());
  }
  ArchiveEntry entry;
  entry.player = player;
  entry.length = trajectory.steps.size();
  entry.config_hash = trajectory.config_hash;
  entry.seed = trajectory.seed;
  entry.eligible = entry.length > kEligibleLength;

  // Verify outside the lock: replay is the expensive part.
  game::IntervenidarEnv env(config);
  try {
    const auto report = mdp::replay(trajectory, env);
    if (!report.exact()) {
      entry.status = "tombstoned";
      entry.reason = "replay diverged: " + report.detail;
    }
  } catch (const Error& e) {
    entry.status = "tombstoned";
    entry.reason = std::string("replay failed: ") + e.what();
  }

  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "session-%06zu", entries_.size() + 1);
  entry.id = id;
  write_atomically(entry_path(entry.id), mdp::to_text(trajectory));
  entries_.push_back(entry);
  write_index();
  return entry;
}

mdp::Trajectory HumanPlayArchive::load(const std::string& id) const {
  if (!find(id)) throw Error("archive: no entry '" + id + "'");
  return mdp::load_trajectory(entry_path(id));
}

void HumanPlayArchive::tombstone(const std::string& id, const std::string& reason) {
  std::lock_guard lock(mutex_);
  for (auto& e : entries_) {
    if (e.id != id) continue;
    e.status = "tombstoned";
    e.reason = reason;
    write_index();
    return;
  }
  throw Error("archive: no entry '" + id + "'");
}

}  // namespace intervenidar::stategen
