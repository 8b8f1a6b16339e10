#include "intervenidar/play/server.hpp"

#include "intervenidar/play/websocket.hpp"

namespace intervenidar::play {

using nlohmann::json;

namespace {

constexpr bridge::Millis kPollInterval{100};
constexpr bridge::Millis kFrameTimeout{10000};

json reply(const char* type) { return json{{"type", type}, {"version", kPlayProtocolVersion}}; }

json error_reply(const std::string& message) {
  json r = reply("error");
  r["message"] = message;
  return r;
}

const json& field(const json& request, const char* name) {
  const auto it = request.find(name);
  if (it == request.end()) throw SessionError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& request, const char* name) {
  const json& v = field(request, name);
  if (!v.is_string()) throw SessionError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

json update_to_json(const Update& u) {
  const std::string pgm = render::to_pgm(u.frame);
  json r = reply("frame");
  r["session"] = u.session;
  r["step"] = u.step;
  r["frame"] = {{"width", u.frame.width},
                {"height", u.frame.height},
                {"encoding", "pgm-base64"},
                {"data", ws::base64_encode({reinterpret_cast<const std::uint8_t*>(pgm.data()), pgm.size()})}};
  r["score"] = u.score;
  r["reward"] = u.reward;
  r["terminal"] = u.terminal;
  r["won"] = u.won;
  r["dead"] = u.dead;
  return r;
}

json handle_request(SessionManager& sessions, const json& request) {
  json out;
  try {
    if (!request.is_object()) throw SessionError("request must be a JSON object");
    if (const auto v = request.find("version"); v != request.end() && *v != kPlayProtocolVersion) {
      throw SessionError("unsupported protocol version " + v->dump() + "; server speaks " +
                         std::to_string(kPlayProtocolVersion));
    }
    const std::string type = string_field(request, "type");
    if (type == "create") {
      const std::string player = request.contains("player") ? string_field(request, "player") : std::string{};
      const std::string hash = request.contains("config_hash") ? string_field(request, "config_hash") : std::string{};
      std::uint64_t seed = 0;
      if (request.contains("seed")) {
        const json& s = request["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
          throw SessionError("field 'seed' must be a non-negative integer");
        }
        seed = s.get<std::uint64_t>();
      }
      out = update_to_json(sessions.create(player, hash, seed));
    } else if (type == "act") {
      const std::string id = string_field(request, "session");
      const json& a = field(request, "action");
      if (!a.is_number_integer()) throw SessionError("field 'action' must be an integer");
      out = update_to_json(sessions.input(id, a.get<int>()));
    } else if (type == "close") {
      const std::string id = string_field(request, "session");
      const auto closed = sessions.close(id);
      out = reply("closed");
      out["session"] = id;
      out["entry"] = closed.entry.to_json();
    } else {
      throw SessionError("unknown request type '" + type + "'");
    }
  } catch (const Error& e) {
    out = error_reply(e.what());
  } catch (const json::exception& e) {
    out = error_reply(e.what());
  }
  if (request.is_object() && request.contains("id")) out["id"] = request["id"];
  return out;
}

json handle_text(SessionManager& sessions, const std::string& text) {
  json request;
  try {
    request = json::parse(text);
  } catch (const json::parse_error& e) {
    return error_reply(std::string("invalid JSON: ") + e.what());
  }
  return handle_request(sessions, request);
}

PlayServer::PlayServer(SessionManager& sessions, std::uint16_t port) : sessions_(sessions), listener_(port) {}

PlayServer::~PlayServer() { stop(); }

void PlayServer::start() {
  accept_thread_ = std::thread([this] { run(); });
}

void PlayServer::run() {
  while (!stopping_) {
    std::unique_ptr<bridge::Stream> stream;
    try {
      stream = listener_.accept();
    } catch (const bridge::TransportError&) {
      if (stopping_) return;
      throw;
    }
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    workers_.emplace_back([this, s = std::move(stream)]() mutable { serve(std::move(s)); });
  }
}

void PlayServer::stop() {
  if (stopping_.exchange(true)) return;
  listener_.shutdown();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void PlayServer::serve(std::unique_ptr<bridge::Stream> stream) {
  try {
    auto accepted = ws::accept(std::move(stream), kFrameTimeout);
    if (!accepted.connection) {
      const json status = {{"service", "intervenidar-play"},
                           {"version", kPlayProtocolVersion},
                           {"live_sessions", sessions_.live_sessions()}};
      ws::write_http_response(*accepted.plain, 200, "OK", "application/json", status.dump() + "\n");
      return;
    }
    auto& conn = *accepted.connection;
    while (!stopping_) {
      if (!conn.wait_readable(kPollInterval)) continue;
      const auto text = conn.receive_text(kFrameTimeout);
      if (!text) return;
      conn.send_text(handle_text(sessions_, *text).dump());
    }
    conn.send_close(1001);
  } catch (const Error&) {
    // Protocol or transport failure ends this connection only. Sessions it
    // opened stay live until closed explicitly.
  }
}

}  // namespace intervenidar::play
