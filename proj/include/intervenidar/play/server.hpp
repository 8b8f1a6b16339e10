#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "intervenidar/bridge/transport.hpp"
#include "intervenidar/play/session.hpp"

// JSON-over-WebSocket front end for human play. Every client message is a
// JSON object with a "type"; every reply carries "type" and "version".
//
//   {"type":"create","player":"ann","config_hash":"...","seed":7}  -> frame
//   {"type":"act","session":"play-1","action":2}                    -> frame
//   {"type":"close","session":"play-1"}                             -> closed
//   anything rejected                                               -> error
//
// A request may carry "id"; the reply echoes it. The frame image is a binary
// PGM, base64-encoded. A plain HTTP GET is answered with a short JSON status
// document instead of an upgrade.
namespace intervenidar::play {

inline constexpr int kPlayProtocolVersion = 1;

nlohmann::json update_to_json(const Update& update);

// Handles one decoded request. Never throws for client mistakes; those
// become error replies.
nlohmann::json handle_request(SessionManager& sessions, const nlohmann::json& request);
// Same, starting from raw text (bad JSON becomes an error reply).
nlohmann::json handle_text(SessionManager& sessions, const std::string& text);

class PlayServer {
 public:
  // Port 0 picks a free port. Listens on the loopback interface only.
  PlayServer(SessionManager& sessions, std::uint16_t port = 0);
  ~PlayServer();
  PlayServer(const PlayServer&) = delete;
  PlayServer& operator=(const PlayServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  // Runs the accept loop on a background thread.
  void start();
  // Blocks in the accept loop until stop() is called from elsewhere.
  void run();
  // Stops accepting, closes every connection and joins its threads.
  void stop();

 private:
  void serve(std::unique_ptr<bridge::Stream> stream);

  SessionManager& sessions_;
  bridge::TcpListener listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mutex_;
  std::list<std::thread> workers_;
};

}  // namespace intervenidar::play
