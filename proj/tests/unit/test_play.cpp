#include <thread>

#include "intervenidar/play/server.hpp"
#include "intervenidar/play/session.hpp"
#include "intervenidar/mdp/rng.hpp"
#include "intervenidar/play/websocket.hpp"
#include "support.hpp"

using namespace intervenidar;
using namespace intervenidar::play;
using namespace testing_support;
using nlohmann::json;

namespace {

struct Fixture {
  TempDir dir;
  std::shared_ptr<stategen::HumanPlayArchive> archive = std::make_shared<stategen::HumanPlayArchive>(dir.path());
  SessionManager sessions{{default_config(), enemy_free_config()}, archive};
};

render::Frame decode_frame(const json& reply) {
  const auto& f = reply.at("frame");
  EXPECT_EQ(f.at("encoding"), "pgm-base64");
  const auto bytes = ws::base64_decode(f.at("data").get<std::string>());
  auto frame = render::parse_pgm(std::string(bytes.begin(), bytes.end()));
  EXPECT_EQ(frame.width, f.at("width").get<int>());
  EXPECT_EQ(frame.height, f.at("height").get<int>());
  return frame;
}

void drive_idle(SessionManager& sessions, const std::string& id, int steps) {
  for (int i = 0; i < steps; ++i) sessions.input(id, 0);
}

}  // namespace

TEST(Sessions, StartFrameIsTheCanonicalStart) {
  Fixture f;
  const auto u = f.sessions.create("ann");
  EXPECT_EQ(u.step, 0u);
  EXPECT_EQ(u.score, 0);
  EXPECT_FALSE(u.terminal);
  EXPECT_EQ(u.frame, render::render(game::new_game(default_config())));
  EXPECT_EQ(f.sessions.live_sessions(), 1u);
}

TEST(Sessions, ConfigSelectionByHash) {
  Fixture f;
  const auto u = f.sessions.create("ann", enemy_free_config()->hash());
  EXPECT_EQ(u.frame, render::render(game::new_game(enemy_free_config())));
  EXPECT_THROW(f.sessions.create("ann", std::string(64, 'f')), SessionError);
}

TEST(Sessions, SameInputsSameFrames) {
  Fixture f;
  const auto a = f.sessions.create("a", {}, 7).session;
  const auto b = f.sessions.create("b", {}, 7).session;
  EXPECT_NE(a, b);
  for (int action : {3, 3, 1, 2, 0, 4, 3}) {
    const auto ua = f.sessions.input(a, action);
    const auto ub = f.sessions.input(b, action);
    EXPECT_EQ(ua.frame, ub.frame);
    EXPECT_EQ(ua.step, ub.step);
  }
}

TEST(Sessions, OffTrackInputLeavesTheFrameUnchanged) {
  Fixture f;
  const auto start = f.sessions.create("ann", enemy_free_config()->hash());
  const auto u = f.sessions.input(start.session, 4);  // down from the bottom row
  EXPECT_EQ(u.frame, start.frame);
  EXPECT_EQ(u.step, 1u);
  EXPECT_EQ(u.reward, 0.0);
}

TEST(Sessions, SegmentCompletionRaisesTheScoreByOne) {
  Fixture f;
  const auto config = enemy_free_config();
  const auto id = f.sessions.create("ann", config->hash()).session;
  // Walk left along the bottom row until the first completion.
  int last_score = 0;
  for (int i = 0; i < 40; ++i) {
    const auto u = f.sessions.input(id, 3);
    if (u.score != last_score) {
      EXPECT_EQ(u.score, last_score + 1);
      EXPECT_EQ(u.reward, 1.0);
      return;
    }
  }
  FAIL() << "no segment completed";
}

TEST(Sessions, TerminalAndUnknownSessionsRejectInput) {
  Fixture f;
  EXPECT_THROW(f.sessions.input("play-99", 0), SessionError);
  const auto id = f.sessions.create("ann").session;
  EXPECT_THROW(f.sessions.input(id, 5), SessionError);
  EXPECT_THROW(f.sessions.input(id, -1), SessionError);
  // Walk up into the enemies' half until the player dies.
  Update u;
  for (int i = 0; i < 5000 && !u.terminal; ++i) u = f.sessions.input(id, i % 7 == 0 ? 3 : 1);
  ASSERT_TRUE(u.terminal);
  EXPECT_TRUE(u.dead || u.won);
  EXPECT_THROW(f.sessions.input(id, 0), SessionError);
  const auto closed = f.sessions.close(id);
  EXPECT_TRUE(closed.entry.ok()) << closed.entry.reason;
}

TEST(Sessions, CloseArchivesWithEligibility) {
  Fixture f;
  const auto short_id = f.sessions.create("ann", enemy_free_config()->hash()).session;
  drive_idle(f.sessions, short_id, 50);
  const auto s = f.sessions.close(short_id);
  EXPECT_TRUE(s.entry.ok());
  EXPECT_FALSE(s.entry.eligible);
  EXPECT_EQ(s.entry.length, 50u);
  EXPECT_EQ(s.entry.player, "ann");
  const auto long_id = f.sessions.create("bob", enemy_free_config()->hash()).session;
  drive_idle(f.sessions, long_id, 1200);
  EXPECT_TRUE(f.sessions.close(long_id).entry.eligible);
  EXPECT_THROW(f.sessions.close(long_id), SessionError);
  EXPECT_THROW(f.sessions.input(long_id, 0), SessionError);
  EXPECT_EQ(f.archive->entries().size(), 2u);
  EXPECT_EQ(f.archive->load(s.entry.id).steps.size(), 50u);
  EXPECT_EQ(f.sessions.live_sessions(), 0u);
}

TEST(Sessions, ConcurrentSessionsAreIsolated) {
  Fixture f;
  const auto reference = f.sessions.create("ref", {}, 1).session;
  std::vector<Update> expected;
  for (int i = 0; i < 200; ++i) expected.push_back(f.sessions.input(reference, i % 5));
  std::vector<std::thread> threads;
  std::vector<int> mismatches(6, 0);
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      const auto id = f.sessions.create("p" + std::to_string(t), {}, 1).session;
      for (int i = 0; i < 200; ++i) {
        if (expected[static_cast<std::size_t>(i)].terminal) break;
        const auto u = f.sessions.input(id, i % 5);
        if (u.frame != expected[static_cast<std::size_t>(i)].frame) ++mismatches[static_cast<std::size_t>(t)];
      }
      f.sessions.close(id);
    });
  }
  for (auto& th : threads) th.join();
  for (int m : mismatches) EXPECT_EQ(m, 0);
  EXPECT_EQ(f.archive->entries().size(), 6u);
}

TEST(Protocol, RequestsAndErrors) {
  Fixture f;
  auto created = handle_request(f.sessions, {{"type", "create"}, {"player", "ann"}, {"id", 17}});
  EXPECT_EQ(created["type"], "frame");
  EXPECT_EQ(created["version"], kPlayProtocolVersion);
  EXPECT_EQ(created["id"], 17);
  EXPECT_EQ(decode_frame(created), render::render(game::new_game(default_config())));
  const std::string id = created["session"];
  const auto acted = handle_request(f.sessions, {{"type", "act"}, {"session", id}, {"action", 3}});
  EXPECT_EQ(acted["step"], 1);
  EXPECT_EQ(acted["terminal"], false);
  const auto closed = handle_request(f.sessions, {{"type", "close"}, {"session", id}});
  EXPECT_EQ(closed["type"], "closed");
  EXPECT_EQ(closed["entry"]["length"], 1);

  auto is_error = [](const json& r) { return r["type"] == "error" && !r["message"].get<std::string>().empty(); };
  EXPECT_TRUE(is_error(handle_request(f.sessions, {{"type", "act"}, {"session", id}, {"action", 0}})));
  EXPECT_TRUE(is_error(handle_request(f.sessions, {{"type", "dance"}})));
  EXPECT_TRUE(is_error(handle_request(f.sessions, {{"type", "act"}, {"session", "nope"}, {"action", 0}})));
  EXPECT_TRUE(is_error(handle_request(f.sessions, {{"type", "act"}, {"session", id}, {"action", "left"}})));
  EXPECT_TRUE(is_error(handle_request(f.sessions, {{"type", "create"}, {"version", 2}})));
  EXPECT_TRUE(is_error(handle_request(f.sessions, json::array())));
  EXPECT_TRUE(is_error(handle_text(f.sessions, "{not json")));
  EXPECT_EQ(handle_text(f.sessions, R"({"type":"create","version":1})")["type"], "frame");
}

TEST(WebSocket, AcceptKeyAndBase64) {
  EXPECT_EQ(ws::accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
  EXPECT_EQ(ws::base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}), "Zm9vYg==");
  mdp::Rng rng(5);
  for (int n = 0; n < 50; ++n) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next_u64());
    EXPECT_EQ(ws::base64_decode(ws::base64_encode(bytes)), bytes);
  }
  EXPECT_THROW(ws::base64_decode("abc"), Error);
}

TEST(WebSocket, ServerPlaysAFullSession) {
  Fixture f;
  PlayServer server(f.sessions);
  server.start();
  auto conn = ws::connect("127.0.0.1", server.port());
  auto call = [&](const json& request) {
    conn->send_text(request.dump());
    const auto text = conn->receive_text(bridge::Millis(5000));
    EXPECT_TRUE(text.has_value());
    return json::parse(text.value_or("null"));
  };
  const auto created = call({{"type", "create"}, {"player", "ws"}, {"config_hash", enemy_free_config()->hash()}});
  ASSERT_EQ(created["type"], "frame") << created.dump();
  const std::string id = created["session"];
  for (int i = 0; i < 5; ++i) EXPECT_EQ(call({{"type", "act"}, {"session", id}, {"action", 3}})["step"], i + 1);
  EXPECT_EQ(call({{"type", "act"}, {"session", id}, {"action", 9}})["type"], "error");
  EXPECT_EQ(call({{"type", "close"}, {"session", id}})["entry"]["length"], 5);
  conn->send_text("garbage");
  EXPECT_EQ(json::parse(*conn->receive_text(bridge::Millis(5000)))["type"], "error");
  conn->send_close();
  EXPECT_FALSE(conn->receive_text(bridge::Millis(5000)).has_value());
  server.stop();
  EXPECT_EQ(f.archive->entries().size(), 1u);
}

TEST(WebSocket, PlainHttpGetReturnsStatus) {
  Fixture f;
  PlayServer server(f.sessions);
  server.start();
  auto s = bridge::connect_tcp("127.0.0.1", server.port());
  const std::string req = "GET /status HTTP/1.1\r\nHost: x\r\n\r\n";
  s->write_all(std::span(reinterpret_cast<const std::uint8_t*>(req.data()), req.size()));
  std::string response;
  std::uint8_t byte;
  try {
    for (;;) {
      s->read_exact(std::span(&byte, 1), bridge::Millis(3000));
      response.push_back(static_cast<char>(byte));
    }
  } catch (const bridge::TransportError&) {
  }
  EXPECT_EQ(response.rfind("HTTP/1.1 200", 0), 0u) << response;
  const auto body = json::parse(response.substr(response.find("\r\n\r\n") + 4));
  EXPECT_EQ(body["service"], "intervenidar-play");
  EXPECT_EQ(body["version"], kPlayProtocolVersion);
}

namespace {

// Writes one masked client frame by hand.
void raw_frame(bridge::Stream& s, std::uint8_t first_byte, const std::string& payload) {
  std::vector<std::uint8_t> f{first_byte, static_cast<std::uint8_t>(0x80 | payload.size())};
  const std::uint8_t mask[4] = {1, 2, 3, 4};
  f.insert(f.end(), mask, mask + 4);
  for (std::size_t i = 0; i < payload.size(); ++i) f.push_back(static_cast<std::uint8_t>(payload[i] ^ mask[i % 4]));
  s.write_all(f);
}

// Performs the upgrade by hand and returns the raw stream.
std::unique_ptr<bridge::Stream> raw_upgrade(std::uint16_t port) {
  auto s = bridge::connect_tcp("127.0.0.1", port);
  const std::string req =
      "GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
      "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n";
  s->write_all(std::span(reinterpret_cast<const std::uint8_t*>(req.data()), req.size()));
  std::string head;
  std::uint8_t byte;
  while (head.size() < 4 || head.substr(head.size() - 4) != "\r\n\r\n") {
    s->read_exact(std::span(&byte, 1), bridge::Millis(3000));
    head.push_back(static_cast<char>(byte));
  }
  EXPECT_EQ(head.rfind("HTTP/1.1 101", 0), 0u) << head;
  EXPECT_NE(head.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo="), std::string::npos);
  return s;
}

}  // namespace

TEST(WebSocket, FragmentedMessagesAndPings) {
  Fixture f;
  PlayServer server(f.sessions);
  server.start();
  auto s = raw_upgrade(server.port());

  auto read_frame = [&] {
    std::uint8_t h[2];
    s->read_exact(h, bridge::Millis(3000));
    std::size_t len = h[1] & 0x7f;
    if (len == 126) {
      std::uint8_t ext[2];
      s->read_exact(ext, bridge::Millis(3000));
      len = (std::size_t{ext[0]} << 8) | ext[1];
    } else if (len == 127) {
      std::uint8_t ext[8];
      s->read_exact(ext, bridge::Millis(3000));
      len = 0;
      for (auto b : ext) len = (len << 8) | b;
    }
    EXPECT_EQ(h[1] & 0x80, 0) << "server frames are unmasked";
    std::vector<std::uint8_t> payload(len);
    s->read_exact(payload, bridge::Millis(3000));
    return std::make_pair(h[0], std::string(payload.begin(), payload.end()));
  };

  raw_frame(*s, 0x89, "hi");  // ping
  const auto pong = read_frame();
  EXPECT_EQ(pong.first, 0x8A);
  EXPECT_EQ(pong.second, "hi");

  raw_frame(*s, 0x01, R"({"type":"cre)");  // text, not final
  raw_frame(*s, 0x89, "");                 // control frame between fragments
  EXPECT_EQ(read_frame().first, 0x8A);
  raw_frame(*s, 0x80, R"(ate","id":"x"})");  // final continuation
  const auto reply = read_frame();
  EXPECT_EQ(reply.first, 0x81);
  const auto j = json::parse(reply.second);
  EXPECT_EQ(j["type"], "frame");
  EXPECT_EQ(j["id"], "x");

  raw_frame(*s, 0x88, std::string("\x03\xe8", 2));  // close 1000
  EXPECT_EQ(read_frame().first, 0x88);
  server.stop();
}

TEST(WebSocket, UnmaskedClientFrameDropsTheConnection) {
  Fixture f;
  PlayServer server(f.sessions);
  server.start();
  auto s = raw_upgrade(server.port());
  const std::string payload = R"({"type":"create"})";
  std::vector<std::uint8_t> frame{0x81, static_cast<std::uint8_t>(payload.size())};
  frame.insert(frame.end(), payload.begin(), payload.end());
  s->write_all(frame);
  std::uint8_t byte;
  EXPECT_THROW(s->read_exact(std::span(&byte, 1), bridge::Millis(3000)), bridge::TransportError);
  EXPECT_EQ(f.sessions.live_sessions(), 0u);
  server.stop();
}
