#include <gtest/gtest.h>

#include "sse/baselines.hpp"
#include "sse/benchmarks.hpp"
#include "sse/pbvi.hpp"

using namespace sse;

namespace {

double solve_value(const std::string& bench, int horizon, Variant v = Variant::H, std::uint64_t seed = 0) {
  Game g = make_benchmark(bench, horizon);
  SolverConfig cfg;
  cfg.variant = v;
  cfg.seed = seed;
  HistorySpace eval(g);
  return solve_sse(g, cfg, eval).value;
}

}  // namespace

TEST(Pbvi, TigerTwoStages) { EXPECT_NEAR(solve_value("dec_tiger", 2), 40, 1e-6); }

TEST(Pbvi, CentipedeThreeStages) { EXPECT_NEAR(solve_value("centipede", 3), 2, 1e-6); }

TEST(Pbvi, CentipedeSixStages) { EXPECT_NEAR(solve_value("centipede", 6), 4.67, 0.02); }

TEST(Pbvi, MabcThreeStages) { EXPECT_NEAR(solve_value("mabc", 3), 2.99, 0.02); }

TEST(Pbvi, PatrollingThreeStages) { EXPECT_NEAR(solve_value("patrolling", 3), 0, 1e-6); }

TEST(Pbvi, MatchMarkovVariantCannotDeter) {
  EXPECT_NEAR(solve_value("match", 3, Variant::H), 0, 1e-6);
  EXPECT_NEAR(solve_value("match", 3, Variant::S), -1000, 1e-6);
  EXPECT_NEAR(solve_value("match", 6, Variant::S), -2000, 1e-6);
}

TEST(Pbvi, SingleStageRuleIsTheRootBackup) {
  Game g = make_match(1);
  HistorySpace eval(g);
  auto r = solve_sse(g, {}, eval);
  ASSERT_EQ(r.policy.leader.rules.size(), 1u);
  EXPECT_TRUE(r.policy.leader.rules[0].covers(eval.L.root(0)));
}

TEST(Pbvi, CentipedePolicySecuresItsValue) {
  Game g = make_centipede(3);
  HistorySpace eval(g);
  auto r = solve_sse(g, {}, eval);
  auto br = follower_best_response(eval, r.policy.leader);
  EXPECT_NEAR(br.vL, 2, 1e-6);
  // continue at s1
  EXPECT_NEAR(r.policy.leader.rules[0].at(eval.L.root(0))[1], 1, 1e-9);
}

TEST(Pbvi, MatchPolicyDependsOnHistory) {
  Game g = make_match(3);
  HistorySpace eval(g);
  auto r = solve_sse(g, {}, eval);
  // stage 2 at sX reached after a defection vs after cooperation
  HistId root = eval.L.root(0);
  HistId after_d = eval.extend_leader(eval.extend_leader(root, 0, 1), 0, 3);
  HistId after_c = eval.extend_leader(eval.extend_leader(root, 0, 2), 0, 3);
  const auto& rule = r.policy.leader.rules[2];
  ASSERT_TRUE(rule.covers(after_d));
  ASSERT_TRUE(rule.covers(after_c));
  EXPECT_NE(rule.at(after_d), rule.at(after_c));
  EXPECT_NEAR(measured_exploitability(eval, r.policy.leader, r.value), 0, 1e-6);
}

TEST(Pbvi, TerminalStageValuesAreTerminalRewards) {
  Game g = make_centipede(3);
  Pbvi run(g, {});
  run.solve();
  const auto& last = run.samples()[g.horizon];
  ASSERT_FALSE(last.empty());
  for (const auto& c : last)
    EXPECT_NEAR(leader_value(run.store(), run.store().lambda[g.horizon], c, run.space()).value, terminal_reward(c),
                1e-9);
}

TEST(Pbvi, SameSeedSameResult) {
  Game g = make_mabc(4);
  SolverConfig cfg;
  cfg.seed = 9;
  HistorySpace e1(g), e2(g);
  auto a = solve_sse(g, cfg, e1), b = solve_sse(g, cfg, e2);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.vf_size, b.vf_size);
  EXPECT_EQ(a.history, b.history);
}

TEST(Pbvi, BudgetIsEnforced) {
  Game g = make_mabc(6);
  SolverConfig cfg;
  cfg.time_budget = 1e-9;
  HistorySpace eval(g);
  EXPECT_THROW(solve_sse(g, cfg, eval), BudgetError);
}

TEST(Pbvi, ConfigIsChecked) {
  SolverConfig cfg;
  cfg.max_occupancy = 0;
  EXPECT_THROW(cfg.check(), DomainError);
}

TEST(Pbvi, ExploitabilityBound) {
  EXPECT_EQ(exploitability_bound(3, 0.9, 10, 0), 0);
  EXPECT_NEAR(exploitability_bound(1, 0.5, 2, 0.1), 0.4, 1e-15);
  EXPECT_NEAR(exploitability_bound(2, 0.7, 5, 0.2), 2 * exploitability_bound(2, 0.7, 5, 0.1), 1e-12);
  EXPECT_THROW(exploitability_bound(1, 1.0, 2, 0.1), DomainError);
}
