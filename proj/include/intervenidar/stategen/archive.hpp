#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intervenidar/game/config.hpp"
#include "intervenidar/mdp/trajectory.hpp"

namespace intervenidar::stategen {

// Sessions strictly longer than this many steps may be used as human starts.
inline constexpr std::size_t kEligibleLength = 1000;

struct ArchiveEntry {
  std::string id;
  std::string player;
  std::size_t length = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  bool eligible = false;
  // "ok" or "tombstoned"; tombstoned entries stay in the index and on disk.
  std::string status = "ok";
  std::string reason;

  bool ok() const { return status == "ok"; }
  nlohmann::json to_json() const;
  static ArchiveEntry from_json(const nlohmann::json& j);
};

// Append-only directory of recorded play sessions:
//   <dir>/index.json          entry list
//   <dir>/<id>.jsonl          one trajectory per session
// Every append is replay-verified against the session's config; sessions that
// fail verification are stored tombstoned. The index is rewritten through a
// temporary file and rename, so readers never see a torn index. One writer
// per directory; the object itself serialises its own writers.
class HumanPlayArchive {
 public:
  // Opens (creating if needed) the archive at `dir`.
  explicit HumanPlayArchive(std::filesystem::path dir);

  const std::filesystem::path& directory() const { return dir_; }
  std::vector<ArchiveEntry> entries() const;
  std::optional<ArchiveEntry> find(const std::string& id) const;
  // Entries with status ok and length above the threshold.
  std::vector<ArchiveEntry> eligible() const;

  // Replays `trajectory` from the canonical start of `config` and stores it.
  // Throws ConfigMismatchError if the trajectory was recorded for another
  // config. Returns the new entry (tombstoned if replay diverged).
  ArchiveEntry append(const mdp::Trajectory& trajectory, const std::string& player,
                      const game::ConfigPtr& config);

  mdp::Trajectory load(const std::string& id) const;

  // Marks an entry unusable; it is never deleted.
  void tombstone(const std::string& id, const std::string& reason);

 private:
  void write_index() const;
  std::filesystem::path entry_path(const std::string& id) const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::vector<ArchiveEntry> entries_;
};

}  // namespace intervenidar::stategen
