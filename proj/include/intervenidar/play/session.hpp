#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "intervenidar/game/env.hpp"
#include "intervenidar/render/render.hpp"
#include "intervenidar/stategen/archive.hpp"

namespace intervenidar::play {

// Rejected request: unknown or closed session, input after terminal,
// unknown config.
class SessionError : public Error {
 public:
  using Error::Error;
};

struct Update {
  std::string session;
  std::uint64_t step = 0;
  render::Frame frame;
  int score = 0;
  double reward = 0.0;
  bool terminal = false;
  bool won = false;
  bool dead = false;
};

struct CloseResult {
  stategen::ArchiveEntry entry;
};

// Live human-play sessions. Each session owns one environment and steps it
// exactly once per accepted input; nothing advances on its own, so the
// recorded action list replays the session exactly. Sessions are
// independent and each is driven by one caller at a time; closing a session
// replay-verifies its recording and appends it to the archive.
class SessionManager {
 public:
  // `configs` lists the playable boards; the first one is the default.
  SessionManager(std::vector<game::ConfigPtr> configs, std::shared_ptr<stategen::HumanPlayArchive> archive,
                 render::RenderConfig render_config = {});

  // Empty config_hash selects the default board.
  Update create(const std::string& player, const std::string& config_hash = {}, std::uint64_t seed = 0);
  Update input(const std::string& session, int action);
  CloseResult close(const std::string& session);

  std::size_t live_sessions() const;

 private:
  struct Session {
    std::string id;
    std::string player;
    std::uint64_t seed = 0;
    std::mutex mutex;
    std::unique_ptr<game::IntervenidarEnv> env;
    mdp::Trajectory recording;
    bool closed = false;
  };

  std::shared_ptr<Session> lookup(const std::string& id) const;
  Update snapshot(const Session& s, double reward) const;

  std::vector<game::ConfigPtr> configs_;
  std::shared_ptr<stategen::HumanPlayArchive> archive_;
  render::RenderConfig render_config_;

  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::set<std::string> closed_;
  std::uint64_t next_id_ = 1;
};

}  // namespace intervenidar::play
