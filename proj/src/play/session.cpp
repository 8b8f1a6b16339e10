#include "intervenidar/play/session.hpp"

#include <chrono>
#include <ctime>

namespace intervenidar::play {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SessionManager::SessionManager(std::vector<game::ConfigPtr> configs,
                               std::shared_ptr<stategen::HumanPlayArchive> archive, render::RenderConfig render_config)
    : configs_(std::move(configs)), archive_(std::move(archive)), render_config_(render_config) {
  if (configs_.empty()) throw Error("play service needs at least one board config");
  if (!archive_) throw Error("play service needs an archive");
}

Update SessionManager::snapshot(const Session& s, double reward) const {
  const auto& st = s.env->state();
  Update u;
  u.session = s.id;
  u.step = st.step;
  u.frame = render::render(st, render_config_);
  u.score = st.score;
  u.reward = reward;
  u.terminal = st.terminal;
  u.won = st.won;
  u.dead = st.dead;
  return u;
}

Update SessionManager::create(const std::string& player, const std::string& config_hash, std::uint64_t seed) {
  game::ConfigPtr config = configs_.front();
  if (!config_hash.empty()) {
    config.reset();
    for (const auto& c : configs_)
      if (c->hash() == config_hash) config = c;
    if (!config) throw SessionError("unknown config hash '" + config_hash + "'");
  }
  auto s = std::make_shared<Session>();
  s->player = player.empty() ? "anonymous" : player;
  s->seed = seed;
  s->env = std::make_unique<game::IntervenidarEnv>(config, render_config_);
  s->env->reset(seed);
  auto& rec = s->recording;
  rec.env_id = s->env->env_id();
  rec.config_hash = config->hash();
  rec.seed = seed;
  rec.start_label = "human";
  rec.start_digest = s->env->digest();
  rec.metadata["player"] = s->player;
  rec.metadata["started_at"] = utc_now();
  {
    std::lock_guard lock(mutex_);
    s->id = "play-" + std::to_string(next_id_++);
    rec.metadata["session"] = s->id;
    sessions_.emplace(s->id, s);
  }
  return snapshot(*s, 0.0);
}

std::shared_ptr<SessionManager::Session> SessionManager::lookup(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it != sessions_.end()) return it->second;
  if (closed_.count(id)) throw SessionError("session '" + id + "' is closed");
  throw SessionError("unknown session '" + id + "'");
}

Update SessionManager::input(const std::string& id, int action) {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  if (s->closed) throw SessionError("session '" + id + "' is closed");
  if (s->env->terminal()) throw SessionError("session '" + id + "' has ended; no further input is accepted");
  if (action < 0 || action >= game::kActionCount) {
    throw SessionError("action " + std::to_string(action) + " is outside [0, " + std::to_string(game::kActionCount) + ")");
  }
  mdp::TrajectoryStep step;
  step.state = s->env->digest();
  step.action = action;
  const auto result = s->env->step(action);
  step.reward = result.reward;
  s->recording.steps.push_back(std::move(step));
  return snapshot(*s, result.reward);
}

CloseResult SessionManager::close(const std::string& id) {
  auto s = lookup(id);
  std::lock_guard lock(s->mutex);
  if (s->closed) throw SessionError("session '" + id + "' is closed");
  s->closed = true;
  {
    std::lock_guard g(mutex_);
    sessions_.erase(id);
    closed_.insert(id);
  }
  auto& rec = s->recording;
  rec.final_digest = s->env->digest();
  rec.terminal = s->env->terminal();
  rec.metadata["ended_at"] = utc_now();
  return {archive_->append(rec, s->player, s->env->config())};
}

std::size_t SessionManager::live_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace intervenidar::play
