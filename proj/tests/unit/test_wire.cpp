#include <cmath>
#include <limits>
#include <thread>

#include "intervenidar/bridge/factory.hpp"
#include "intervenidar/bridge/remote.hpp"
#include "intervenidar/bridge/scripted.hpp"
#include "intervenidar/bridge/transport.hpp"
#include "intervenidar/bridge/wire.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/mdp/rng.hpp"
#include "support.hpp"

using namespace intervenidar;
using namespace intervenidar::bridge;
using namespace testing_support;

namespace {

// Reports every optional channel so the negotiation paths are exercised.
class ChannelAgent final : public Agent {
 public:
  explicit ChannelAgent(ObservationKind kind = ObservationKind::kLatent) : kind_(kind) {}
  std::string id() const override { return "channel-agent"; }
  Capabilities capabilities() const override { return {kProtocolVersion, kind_, true, true, true}; }
  void begin_episode(std::uint64_t seed) override { rng_ = mdp::Rng::derived(seed, "agent"); }
  mdp::PolicyResponse act(const game::ObservationSource& view) override {
    double checksum = 0;
    if (kind_ == ObservationKind::kLatent) {
      checksum = static_cast<double>(view.latent().step);
    } else {
      const auto obs = view.pixels();
      for (auto p : obs.frames[3].pixels) checksum += p;
    }
    const int a = static_cast<int>(rng_.uniform_below(5));
    return {a, checksum, std::vector<double>{0, 1, 2, 3, 4}, std::vector<double>{checksum, -1.5}};
  }

 private:
  ObservationKind kind_;
  mdp::Rng rng_{0};
};

// Serves `agent` on one end of a socketpair from a background thread.
struct Served {
  std::unique_ptr<Stream> harness_end;
  std::thread thread;
  ~Served() {
    harness_end.reset();
    if (thread.joinable()) thread.join();
  }
};

std::unique_ptr<Served> serve_in_background(std::shared_ptr<Agent> agent, game::ConfigPtr config) {
  auto [a, b] = stream_pair();
  auto served = std::make_unique<Served>();
  served->harness_end = std::move(a);
  served->thread = std::thread([agent, config, s = std::shared_ptr<Stream>(std::move(b))] {
    serve_agent(*s, *agent, config);
  });
  return served;
}

wire::Message random_message(mdp::Rng& rng) {
  auto real = [&] { return (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform_int(-300, 300)); };
  auto text = [&] {
    std::string s;
    const int n = rng.uniform_int(0, 40);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(rng.uniform_int(0, 255)));
    return s;
  };
  switch (rng.uniform_below(8)) {
    case 0: return wire::Hello{static_cast<std::uint16_t>(rng.next_u64()), static_cast<std::uint8_t>(rng.next_u64()),
                               static_cast<std::uint8_t>(rng.next_u64())};
    case 1: return wire::HelloAck{static_cast<std::uint16_t>(rng.next_u64()),
                                  rng.uniform_below(2) ? ObservationKind::kPixels : ObservationKind::kLatent,
                                  static_cast<std::uint8_t>(rng.uniform_below(8)), text()};
    case 2: {
      wire::Reset r;
      for (auto& b : r.config_hash.bytes) b = static_cast<std::uint8_t>(rng.next_u64());
      r.seed = rng.next_u64();
      return r;
    }
    case 3: {
      if (rng.uniform_below(2)) return wire::Observe{wire::LatentObservation{text()}};
      wire::PixelObservation p;
      p.width = static_cast<std::uint16_t>(rng.uniform_int(1, 9));
      p.height = static_cast<std::uint16_t>(rng.uniform_int(1, 9));
      p.frames = static_cast<std::uint8_t>(rng.uniform_int(1, 4));
      p.data.resize(static_cast<std::size_t>(p.width) * p.height * p.frames);
      for (auto& b : p.data) b = static_cast<std::uint8_t>(rng.next_u64());
      return wire::Observe{p};
    }
    case 4: return wire::ActRequest{rng.next_u64()};
    case 5: {
      wire::Action a;
      a.action = static_cast<std::uint8_t>(rng.uniform_below(5));
      if (rng.uniform_below(2)) a.value = real();
      if (rng.uniform_below(2)) a.q_values = std::vector<double>(5, real());
      if (rng.uniform_below(2)) {
        std::vector<double> e(static_cast<std::size_t>(rng.uniform_int(0, 64)));
        for (auto& x : e) x = real();
        a.embedding = e;
      }
      return a;
    }
    case 6: return wire::ErrorMessage{text()};
    default: return wire::Bye{};
  }
}

}  // namespace

TEST(Wire, FuzzRoundTrip) {
  mdp::Rng rng(99);
  for (int i = 0; i < 5000; ++i) {
    const auto m = random_message(rng);
    const auto bytes = wire::encode(m);
    ASSERT_EQ(wire::decode(bytes), m) << "iteration " << i;
    // Every strict prefix is rejected.
    const std::size_t cut = static_cast<std::size_t>(rng.uniform_below(bytes.size()));
    EXPECT_THROW(wire::decode(std::span(bytes.data(), cut)), FormatError);
    // Trailing bytes are rejected.
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(wire::decode(longer), FormatError);
  }
}

TEST(Wire, LayoutIsBigEndianWithLengthPrefix) {
  const auto bytes = wire::encode(wire::ActRequest{0x0102030405060708ULL});
  const std::vector<std::uint8_t> expected{0, 0, 0, 9, 0x05, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(bytes, expected);
  wire::Action a;
  a.action = 2;
  a.value = 1.0;
  const auto ab = wire::encode(a);
  // ... | type | action | flags | f64 1.0 = 3ff0000000000000
  ASSERT_GE(ab.size(), 15u);
  EXPECT_EQ(ab[4], 0x06);
  EXPECT_EQ(ab[5], 2);
  EXPECT_EQ(ab[7], 0x3f);
  EXPECT_EQ(ab[8], 0xf0);
}

TEST(Wire, RejectsMalformedFrames) {
  EXPECT_THROW(wire::decode(std::vector<std::uint8_t>{0, 0, 0, 1, 0x7f}), FormatError);  // unknown type
  EXPECT_THROW(wire::decode(std::vector<std::uint8_t>{0, 0, 0, 0}), FormatError);
  wire::Action a;
  a.value = 1.0;
  auto bytes = wire::encode(a);
  // Replace the value with a NaN bit pattern.
  for (std::size_t i = 0; i < 8; ++i) bytes[7 + i] = i == 0 ? 0x7f : 0xff;
  EXPECT_THROW(wire::decode(bytes), FormatError);
  wire::Action inf;
  inf.embedding = std::vector<double>{std::numeric_limits<double>::infinity()};
  EXPECT_THROW(wire::encode(inf), FormatError);
}

TEST(Handshake, NegotiatesWithinTheOffer) {
  auto served = serve_in_background(std::make_shared<ChannelAgent>(), default_config());
  wire::Hello offer;
  offer.channels = wire::kChannelValue;
  const auto n = negotiate(*served->harness_end, offer);
  EXPECT_EQ(n.agent_id, "channel-agent");
  EXPECT_TRUE(n.capabilities.value);
  EXPECT_FALSE(n.capabilities.q_values);
  EXPECT_FALSE(n.capabilities.embedding);
  send_message(*served->harness_end, wire::Bye{});
}

TEST(Handshake, VersionMismatchNamesBothVersions) {
  auto served = serve_in_background(std::make_shared<UniformRandomAgent>(), default_config());
  wire::Hello offer;
  offer.version = 9;
  try {
    negotiate(*served->harness_end, offer);
    FAIL() << "expected HandshakeError";
  } catch (const HandshakeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('9'), std::string::npos) << msg;
    EXPECT_NE(msg.find(std::to_string(kProtocolVersion)), std::string::npos) << msg;
  }
}

TEST(Handshake, AgentNeedingUnofferedObservationIsRejected) {
  auto served = serve_in_background(std::make_shared<ChannelAgent>(ObservationKind::kPixels), default_config());
  wire::Hello offer;
  offer.observations = wire::kOfferLatent;
  EXPECT_THROW(negotiate(*served->harness_end, offer), HandshakeError);
}

TEST(Handshake, AckOutsideTheOfferIsRejected) {
  auto [harness, agent] = stream_pair();
  std::thread fake([s = std::shared_ptr<Stream>(std::move(agent))] {
    receive_message(*s);
    send_message(*s, wire::HelloAck{kProtocolVersion, ObservationKind::kLatent, wire::kChannelEmbedding, "sneaky"});
  });
  wire::Hello offer;
  offer.channels = wire::kChannelValue;
  EXPECT_THROW(negotiate(*harness, offer), HandshakeError);
  fake.join();
}

namespace {

mdp::Trajectory play(Agent& agent, const game::ConfigPtr& config, std::uint64_t seed, int steps) {
  game::IntervenidarEnv env(config);
  env.reset(seed);
  AgentPolicy policy(agent);
  return mdp::run_episode(env, policy, {seed, steps, "control"});
}

}  // namespace

TEST(Remote, InProcessAndWireEpisodesAreIdentical) {
  const auto config = default_config();
  UniformRandomAgent local;
  const auto direct = play(local, config, 11, 600);
  auto served = serve_in_background(std::make_shared<UniformRandomAgent>(), config);
  RemoteAgent remote(std::move(served->harness_end));
  EXPECT_EQ(remote.id(), "random");
  const auto wired = play(remote, config, 11, 600);
  EXPECT_EQ(wired.final_digest, direct.final_digest);
  EXPECT_EQ(mdp::to_text(wired), mdp::to_text(direct));
}

TEST(Remote, PixelObservationsAndChannelsCrossTheWire) {
  const auto config = default_config();
  ChannelAgent local(ObservationKind::kPixels);
  const auto direct = play(local, config, 2, 40);
  auto served = serve_in_background(std::make_shared<ChannelAgent>(ObservationKind::kPixels), config);
  RemoteAgent remote(std::move(served->harness_end));
  EXPECT_EQ(remote.capabilities().observation, ObservationKind::kPixels);
  const auto wired = play(remote, config, 2, 40);
  ASSERT_EQ(wired.steps.size(), direct.steps.size());
  for (std::size_t i = 0; i < wired.steps.size(); ++i) {
    EXPECT_EQ(wired.steps[i].value, direct.steps[i].value);
    EXPECT_EQ(wired.steps[i].q_values, direct.steps[i].q_values);
    EXPECT_EQ(wired.steps[i].embedding, direct.steps[i].embedding);
  }
}

TEST(Remote, SilentAgentTimesOutAndAbortsTheEpisode) {
  auto [harness, agent] = stream_pair();
  std::thread fake([s = std::shared_ptr<Stream>(std::move(agent))] {
    receive_message(*s);
    send_message(*s, wire::HelloAck{kProtocolVersion, ObservationKind::kLatent, 0, "mute"});
    try {
      for (;;) receive_message(*s, Millis(2000));  // never answers
    } catch (const Error&) {
    }
  });
  {
    RemoteAgent remote(std::move(harness), Millis(100));
    const auto t = play(remote, default_config(), 0, 10);
    EXPECT_TRUE(t.aborted);
    EXPECT_EQ(t.steps.size(), 0u);
    EXPECT_NE(t.abort_reason.find("respond"), std::string::npos) << t.abort_reason;
  }
  fake.join();
}

TEST(Remote, OutOfRangeActionIsAProtocolError) {
  auto [harness, agent] = stream_pair();
  std::thread fake([s = std::shared_ptr<Stream>(std::move(agent))] {
    receive_message(*s);
    send_message(*s, wire::HelloAck{kProtocolVersion, ObservationKind::kLatent, 0, "bad"});
    try {
      for (;;) {
        if (std::holds_alternative<wire::ActRequest>(receive_message(*s))) {
          wire::Action a;
          a.action = 9;
          send_message(*s, a);
        }
      }
    } catch (const Error&) {
    }
  });
  {
    RemoteAgent remote(std::move(harness));
    const auto t = play(remote, default_config(), 0, 10);
    EXPECT_TRUE(t.aborted);
    EXPECT_NE(t.abort_reason.find("out of range"), std::string::npos) << t.abort_reason;
  }
  fake.join();
}

TEST(Transcript, GoldenRoundTrip) {
  const auto config = default_config();
  auto served = serve_in_background(std::make_shared<UniformRandomAgent>(), config);
  std::string transcript;
  {
    RecordingStream recorder(*served->harness_end);
    {
      // RemoteAgent needs ownership; wrap the recorder in a forwarding stream.
      struct Forward final : Stream {
        explicit Forward(Stream& s) : s(s) {}
        void write_all(std::span<const std::uint8_t> d) override { s.write_all(d); }
        void read_exact(std::span<std::uint8_t> d, Millis t) override { s.read_exact(d, t); }
        bool wait_readable(Millis t) override { return s.wait_readable(t); }
        Stream& s;
      };
      wire::Hello offer;
      offer.observations = wire::kOfferLatent;
      offer.channels = 0;
      RemoteAgent remote(std::make_unique<Forward>(recorder), kDefaultTimeout, offer);
      play(remote, config, 5, 3);
    }
    transcript = write_transcript(recorder.frames());
  }
  // Latent observations embed the full state document; the transcript is
  // therefore a complete, byte-level record of a short episode.
  expect_golden("wire_transcript.txt", transcript);
  const auto frames = parse_transcript(transcript);
  EXPECT_EQ(write_transcript(frames), transcript);
  ASSERT_GE(frames.size(), 2u);
  EXPECT_EQ(wire::type_of(wire::decode(frames.front().bytes)), wire::Type::kHello);
  EXPECT_EQ(wire::type_of(wire::decode(frames.back().bytes)), wire::Type::kBye);
}

TEST(Transcript, ReplayingTheGoldenTranscriptAgainstTheAgentReproducesItsReplies) {
  const auto path = golden_dir() / "wire_transcript.txt";
  if (!fs::exists(path)) GTEST_SKIP() << "golden transcript not generated yet";
  const auto frames = parse_transcript(read_file(path));
  auto served = serve_in_background(std::make_shared<UniformRandomAgent>(), default_config());
  for (const auto& f : frames) {
    if (f.outgoing) {
      served->harness_end->write_all(f.bytes);
    } else {
      EXPECT_EQ(wire::encode(receive_message(*served->harness_end)), f.bytes);
    }
  }
}

TEST(Transcript, RejectsMalformedLines) {
  EXPECT_THROW(parse_transcript("> HELLO 00\n"), FormatError);
  EXPECT_THROW(parse_transcript("? HELLO 0000000108\n"), FormatError);
  EXPECT_THROW(parse_transcript("> HELLO 0000000108\n"), FormatError);  // label does not match the frame
  EXPECT_NO_THROW(parse_transcript("# comment\n> BYE 0000000108\n"));
}

TEST(Factory, BuiltinsAndErrors) {
  EXPECT_EQ(make_agent("builtin:random")->id(), "random");
  EXPECT_EQ(make_agent("stationary")->id(), "stationary");
  EXPECT_EQ(make_agent("greedy-painter")->id(), "greedy-painter");
  EXPECT_EQ(make_agent("builtin:wandering-painter")->id(), "wandering-painter");
  EXPECT_THROW(make_agent("builtin:dqn"), UnknownAgentError);
  EXPECT_THROW(make_agent("carrier-pigeon:x"), UnknownAgentError);
  EXPECT_THROW(make_agent("tcp:localhost"), UnknownAgentError);
}

TEST(Factory, TcpAgent) {
  TcpListener listener(0);
  const auto config = default_config();
  std::thread server([&] {
    auto s = listener.accept();
    UniformRandomAgent agent;
    serve_agent(*s, agent, config);
  });
  {
    auto agent = make_agent("tcp:127.0.0.1:" + std::to_string(listener.port()));
    UniformRandomAgent local;
    EXPECT_EQ(mdp::to_text(play(*agent, config, 3, 100)), mdp::to_text(play(local, config, 3, 100)));
  }
  server.join();
}

TEST(Factory, ExecAgentThatDiesIsATransportError) {
  auto agent_or = [] { return make_agent("exec:exit 0", {Millis(500)}); };
  EXPECT_THROW(agent_or(), AgentError);
}
