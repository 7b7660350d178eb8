#include <gtest/gtest.h>

#include "sse/backup.hpp"
#include "support.hpp"

using namespace sse;

TEST(Backup, SingleMemberPicksTheBetterLeaderAction) {
  Game g = detail::blank({"s"}, {"x", "y"}, {"u"}, 1);
  g.set_p(0, 0, 0, 0, 1);
  g.set_p(0, 1, 0, 0, 1);
  g.set_r(0, 0, 0, 0, 2, 0);
  g.set_r(0, 1, 0, 0, 5, 0);
  g.finalize();
  HistorySpace sp(g);
  VectorStore store;
  VectorSet& z = store.make(1);
  make_zero_set(z);
  CredibleSet c = initial_credible_set(sp);
  auto sol = greedy_backup_milp(c, index_conditionals(c), 0, z, sp);
  ASSERT_TRUE(sol.feasible);
  EXPECT_NEAR(sol.qL, 5, 1e-9);
  EXPECT_EQ(sol.rule.at(sp.L.root(0)), (std::vector<double>{0, 1}));
}

TEST(Backup, InducesTheFollowerWhenItPays) {
  // the follower matches the leader's action for +1 and otherwise gets 0;
  // the leader wants the follower on v and is paid only then
  Game g = detail::blank({"s"}, {"x", "y"}, {"u", "v"}, 1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      g.set_p(0, a, b, 0, 1);
      g.set_r(0, a, b, 0, b == 1 ? 1 : 0, a == b ? 1 : 0);
    }
  g.finalize();
  HistorySpace sp(g);
  VectorStore store;
  VectorSet& z = store.make(1);
  make_zero_set(z);
  CredibleSet c = initial_credible_set(sp);
  auto sol = greedy_backup_milp(c, index_conditionals(c), 0, z, sp);
  ASSERT_TRUE(sol.feasible);
  EXPECT_NEAR(sol.qL, 1, 1e-9);
  EXPECT_GE(sol.rule.at(sp.L.root(0))[1], 0.5 - 1e-9);
}

TEST(Backup, InfeasibleMemberIsReported) {
  // two members that differ only in the follower's first action: the one with
  // the lower, leader-independent follower value can never be preferred
  Game g = detail::blank({"s", "a", "b"}, {"x", "y"}, {"u", "v"}, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      g.set_p(0, a, b, 1 + b, 1);
      g.set_r(0, a, b, 1 + b, 0, b);
      for (int s = 1; s < 3; ++s) g.set_p(s, a, b, s, 1);
    }
  g.finalize();
  HistorySpace sp(g);
  CredibleSet c0 = initial_credible_set(sp);
  LeaderRule d;
  d.dist[sp.L.root(0)] = {1, 0};
  CredibleSet c1 = credible_transition(c0, d, sp);
  ASSERT_EQ(c1.members.size(), 2u);
  VectorStore store;
  VectorSet& z = store.make(2);
  make_zero_set(z);
  CondIndex ix = index_conditionals(c1);
  int feasible = 0;
  for (int o = 0; o < 2; ++o) feasible += greedy_backup_milp(c1, ix, o, z, sp).feasible;
  EXPECT_EQ(feasible, 1);
}

TEST(Backup, MatchesBruteForceOracle) {
  std::mt19937_64 rng(101);
  int n = 0;
  while (n < 12) {
    auto in = fixtures::random_backup_instance(rng);
    if (!in) continue;
    ++n;
    for (int o = 0; o < int(in->c.members.size()); ++o) {
      BackupOptions opt;
      auto sol = greedy_backup_milp(in->c, in->ix, o, in->next, *in->sp, opt);
      auto orc = fixtures::backup_oracle(*in, o);
      ASSERT_EQ(sol.feasible, orc.has_value()) << "instance " << n << " member " << o;
      if (orc) {
        EXPECT_NEAR(sol.qL, *orc, 1e-4) << "instance " << n << " member " << o;
      }
    }
  }
}

TEST(Backup, SnapRowRemovesSolverNoise) {
  std::vector<double> d{0.3333333334, 0.6666666666};
  detail::snap_row(d);
  EXPECT_EQ(d[0], 1.0 / 3);
  EXPECT_EQ(d[1], 2.0 / 3);
  std::vector<double> z{0, 0};
  EXPECT_THROW(detail::snap_row(z), DomainError);
}
