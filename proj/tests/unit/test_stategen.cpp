#include <algorithm>
#include <fstream>

#include "../oracles/oracles.hpp"
#include "intervenidar/bridge/scripted.hpp"
#include "intervenidar/game/env.hpp"
#include "intervenidar/interventions/interventions.hpp"
#include "intervenidar/mdp/episode.hpp"
#include "intervenidar/stategen/state_gen.hpp"
#include "support.hpp"

using namespace intervenidar;
using namespace intervenidar::stategen;
using namespace testing_support;

namespace {

// A session of `steps` no-move actions: the player sits in the quiet lower
// half, which the enemies never enter.
mdp::Trajectory idle_session(const game::ConfigPtr& config, int steps) {
  game::IntervenidarEnv env(config);
  env.reset();
  bridge::StationaryAgent agent;
  bridge::AgentPolicy policy(agent);
  return mdp::run_episode(env, policy, {0, steps, "human"});
}

}  // namespace

TEST(Kopa, ProvenanceRegeneratesTheState) {
  const auto config = default_config();
  bridge::UniformRandomAgent agent;
  const auto g = kopa_state(agent, config, 100, 10, 5);
  EXPECT_EQ(g.provenance.method, Method::kKopa);
  EXPECT_EQ(g.provenance.actions.size(), 110u);
  EXPECT_EQ(g.state.step, 110u);
  EXPECT_FALSE(g.state.terminal);
  EXPECT_EQ(g.provenance.digest, game::latent_digest(g.state));
  EXPECT_EQ(game::latent_digest(regenerate(g.provenance, config)), g.provenance.digest);
  const auto back = Provenance::from_json(g.provenance.to_json());
  EXPECT_EQ(back.actions, g.provenance.actions);
  EXPECT_EQ(back.digest, g.provenance.digest);
}

TEST(Kopa, TamperedProvenanceIsRejected) {
  const auto config = default_config();
  bridge::UniformRandomAgent agent;
  const auto g = kopa_state(agent, config, 50, 10, 1);
  auto shorter = g.provenance;
  shorter.actions.pop_back();
  EXPECT_THROW(regenerate(shorter, config), Error);
  auto idle = g.provenance;
  std::fill(idle.actions.begin(), idle.actions.end(), 0);
  EXPECT_THROW(regenerate(idle, config), Error);
  auto h = kopa_state(agent, config, 50, 10, 1);
  EXPECT_THROW(regenerate(h.provenance, enemy_free_config()), ConfigMismatchError);
}

TEST(Kopa, SameSeedSameState) {
  const auto config = default_config();
  bridge::UniformRandomAgent a, b;
  EXPECT_EQ(kopa_state(a, config, 200, 20, 9).provenance.digest, kopa_state(b, config, 200, 20, 9).provenance.digest);
  EXPECT_NE(kopa_state(a, config, 200, 20, 9).provenance.digest, kopa_state(b, config, 200, 20, 10).provenance.digest);
}

TEST(Kopa, PrefixIsTheAgentsOwnTrajectory) {
  const auto config = default_config();
  bridge::GreedyPainterAgent painter;
  const auto g = kopa_state(painter, config, 120, 0, 3);
  const auto on_policy = on_policy_digests(painter, config, g.provenance.seed, 120);
  ASSERT_EQ(on_policy.size(), 121u);
  EXPECT_EQ(on_policy.back(), g.provenance.digest);
}

TEST(Kopa, ReportsInfeasibleWhenEveryAttemptEnds) {
  // The deterministic painter finishes the board long before step 900.
  bridge::GreedyPainterAgent painter;
  try {
    kopa_state(painter, default_config(), 900, 10, 0, {3});
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.attempts, 3);
  }
}

TEST(Kopa, RetriesUseDistinctSeeds) {
  EXPECT_NE(attempt_seed(4, 0), attempt_seed(4, 1));
  EXPECT_EQ(attempt_seed(4, 2), attempt_seed(4, 2));
}

TEST(AgentSwap, RejectsTheEvaluatedAgentItself) {
  bridge::UniformRandomAgent random;
  EXPECT_THROW(agent_swap_state(random, "random", default_config(), 100, 0), Error);
  bridge::GreedyPainterAgent painter({24, 0.5, "wandering-painter"});
  const auto g = agent_swap_state(painter, "random", default_config(), 100, 0);
  EXPECT_EQ(g.provenance.method, Method::kAgentSwap);
  EXPECT_EQ(g.provenance.source, "wandering-painter");
  EXPECT_EQ(g.state.step, 100u);
  EXPECT_EQ(game::latent_digest(regenerate(g.provenance, default_config())), g.provenance.digest);
}

TEST(Overlap, MatchesMultisetOracle) {
  mdp::Rng rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<mdp::Digest> a, b;
    for (int i = 0; i < 40; ++i) a.push_back(mdp::sha256(std::to_string(rng.uniform_below(15))));
    for (int i = 0; i < 30; ++i) b.push_back(mdp::sha256(std::to_string(rng.uniform_below(15))));
    const auto r = overlap_audit(a, b);
    EXPECT_EQ(r.generated, a.size());
    EXPECT_EQ(r.overlapping, oracle::multiset_intersection(a, b));
    std::set<mdp::Digest> shared;
    for (const auto& d : a)
      if (std::find(b.begin(), b.end(), d) != b.end()) shared.insert(d);
    EXPECT_EQ(r.shared, std::vector<mdp::Digest>(shared.begin(), shared.end()));
  }
}

TEST(Overlap, KZeroStatesAreAllOnPolicy) {
  const auto config = default_config();
  bridge::UniformRandomAgent agent;
  std::vector<mdp::Digest> generated;
  std::vector<mdp::Digest> reference;
  for (int n : {100, 200, 300}) {
    const auto g = kopa_state(agent, config, n, 0, 17);
    generated.push_back(g.provenance.digest);
    const auto on = on_policy_digests(agent, config, g.provenance.seed, n);
    reference.insert(reference.end(), on.begin(), on.end());
  }
  EXPECT_DOUBLE_EQ(overlap_audit(generated, reference).fraction(), 1.0);
}

TEST(Overlap, InterventionStatesAreOffPolicy) {
  const auto config = default_config();
  bridge::UniformRandomAgent agent;
  const auto reference = on_policy_digests(agent, config, 0, 500);
  std::vector<mdp::Digest> generated;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto iv = interventions::sample_condition(interventions::Kind::kFillLineSegments, s, *config);
    generated.push_back(game::latent_digest(interventions::apply(game::new_game(config), iv).state));
  }
  EXPECT_EQ(overlap_audit(generated, reference).overlapping, 0u);
}

TEST(Archive, EligibilityThresholdAndPersistence) {
  TempDir dir;
  const auto config = default_config();
  {
    HumanPlayArchive archive(dir.path());
    const auto short_entry = archive.append(idle_session(config, 50), "ann", config);
    EXPECT_TRUE(short_entry.ok());
    EXPECT_FALSE(short_entry.eligible);
    EXPECT_EQ(short_entry.length, 50u);
    const auto long_entry = archive.append(idle_session(config, 1200), "ann", config);
    EXPECT_TRUE(long_entry.eligible);
    const auto edge = archive.append(idle_session(config, 1000), "bob", config);
    EXPECT_FALSE(edge.eligible);  // strictly longer than 1000
  }
  HumanPlayArchive reopened(dir.path());
  ASSERT_EQ(reopened.entries().size(), 3u);
  EXPECT_EQ(reopened.eligible().size(), 1u);
  EXPECT_EQ(reopened.load(reopened.entries()[1].id).steps.size(), 1200u);
}

TEST(Archive, RejectsForeignConfigAndTombstonesDivergentSessions) {
  TempDir dir;
  HumanPlayArchive archive(dir.path());
  const auto config = default_config();
  EXPECT_THROW(archive.append(idle_session(config, 10), "x", enemy_free_config()), ConfigMismatchError);
  auto forged = idle_session(config, 10);
  forged.steps[4].reward = 1.0;
  const auto e = archive.append(forged, "x", config);
  EXPECT_FALSE(e.ok());
  EXPECT_EQ(e.status, "tombstoned");
  EXPECT_FALSE(e.reason.empty());
  EXPECT_EQ(archive.entries().size(), 1u);  // stored, never dropped
}

TEST(HumanStarts, StatesComeFromTheRecordedSession) {
  TempDir dir;
  HumanPlayArchive archive(dir.path());
  const auto config = default_config();
  bridge::GreedyPainterAgent wanderer({24, 0.5, "wandering-painter"});
  const auto entries = record_sessions(archive, wanderer, "synthetic", config, 1, 7, 3000);
  ASSERT_EQ(entries.size(), 1u);
  const auto& entry = entries[0];
  ASSERT_TRUE(entry.ok());
  const auto t = archive.load(entry.id);
  const int ns[] = {100, 200};
  const auto states = human_start_states(archive, entry.id, ns, config);
  ASSERT_EQ(states.size(), 2u);
  EXPECT_EQ(states[0].provenance.digest, t.steps[100].state);
  EXPECT_EQ(states[1].provenance.digest, t.steps[200].state);
  EXPECT_EQ(states[0].provenance.source, entry.id);
  EXPECT_EQ(game::latent_digest(regenerate(states[1].provenance, config)), t.steps[200].state);
  EXPECT_THROW(human_start_state(archive, entry.id, static_cast<int>(entry.length), config), Error);
}

TEST(HumanStarts, CorruptedSessionIsTombstonedOnUse) {
  TempDir dir;
  const auto config = default_config();
  std::string id;
  {
    HumanPlayArchive archive(dir.path());
    id = archive.append(idle_session(config, 300), "ann", config).id;
  }
  // Flip one recorded action on disk.
  const auto path = dir.path() / (id + ".jsonl");
  auto t = mdp::load_trajectory(path);
  t.steps[10].action = static_cast<int>(game::Action::kLeft);
  mdp::save_trajectory(t, path);
  HumanPlayArchive archive(dir.path());
  EXPECT_THROW(human_start_state(archive, id, 100, config), Error);
  EXPECT_FALSE(archive.find(id)->ok());
}
