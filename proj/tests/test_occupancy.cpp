#include <gtest/gtest.h>

#include "sse/benchmarks.hpp"
#include "sse/credible.hpp"
#include "support.hpp"

using namespace sse;

namespace {

// Markov policies over every state of g, one row/action per state.
LeaderPolicy markov_leader(const Game& g, const std::vector<std::vector<int>>& act_by_stage) {
  LeaderPolicy p;
  p.markov = true;
  for (int t = 0; t < g.horizon; ++t) {
    LeaderRule r;
    r.stage = t;
    for (int s = 0; s < g.nS(); ++s) {
      std::vector<double> d(g.nAL(), 0.0);
      d[act_by_stage[t][s]] = 1;
      r.dist[s] = d;
    }
    p.rules.push_back(r);
  }
  return p;
}

FollowerPolicy markov_follower(const Game& g, const std::vector<std::vector<int>>& act_by_stage) {
  FollowerPolicy p;
  p.markov = true;
  for (int t = 0; t < g.horizon; ++t) {
    FollowerRule r;
    r.stage = t;
    for (int s = 0; s < g.nS(); ++s) r.act[s] = act_by_stage[t][s];
    p.rules.push_back(r);
  }
  return p;
}

std::vector<std::vector<int>> constant(const Game& g, int a) {
  return std::vector<std::vector<int>>(g.horizon, std::vector<int>(g.nS(), a));
}

LeaderRule all_leader(const OccupancyState& o, const Game& g, std::vector<double> d) {
  LeaderRule r;
  r.stage = o.stage;
  for (const auto& e : o.support) r.dist[e.hL] = d;
  (void)g;
  return r;
}

FollowerRule all_follower(const OccupancyState& o, int a) {
  FollowerRule r;
  r.stage = o.stage;
  for (const auto& e : o.support) r.act[e.hF] = a;
  return r;
}

constexpr int kTake = 0, kContinue = 1;

}  // namespace

TEST(Occupancy, InitialOccupancyHasNoReward) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  auto o = initial_occupancy(sp);
  EXPECT_EQ(value_so_far(o, Player::Leader), 0);
  EXPECT_EQ(value_so_far(o, Player::Follower), 0);
  ASSERT_EQ(o.support.size(), 1u);
  EXPECT_EQ(o.support[0].p, 1.0);
}

TEST(Occupancy, DeterministicStepGivesPointMass) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  auto o = initial_occupancy(sp);
  auto o1 = tau_advance(o, all_leader(o, g, {0, 1}), all_follower(o, kTake), sp);
  ASSERT_EQ(o1.support.size(), 1u);
  EXPECT_EQ(o1.support[0].s, 1);
  EXPECT_EQ(o1.support[0].p, 1.0);
  EXPECT_EQ(o1.rhoL, 0);
  EXPECT_EQ(o1.rhoF, 0);
  EXPECT_EQ(marginal_belief(o1, g.nS()), (std::vector<double>{0, 1, 0, 0}));
}

TEST(Occupancy, TigerBeliefIsUniformAfterAnyStep) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  auto o = initial_occupancy(sp);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto o1 = tau_advance(o, all_leader(o, g, a ? std::vector<double>{0.3, 0.7} : std::vector<double>{1, 0}),
                            all_follower(o, b), sp);
      auto bel = marginal_belief(o1, 2);
      EXPECT_DOUBLE_EQ(bel[0], 0.5);
      EXPECT_DOUBLE_EQ(bel[1], 0.5);
    }
}

TEST(Occupancy, UncoveredHistoryIsADomainError) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  auto o = initial_occupancy(sp);
  LeaderRule empty;
  EXPECT_THROW(tau_advance(o, empty, all_follower(o, 0), sp), DomainError);
}

TEST(Occupancy, CentipedeJointPolicyValues) {
  Game g = make_centipede(4);
  HistorySpace sp(g);
  // s1..s4 are states 0..3, leader moves at s1 and s3
  auto take_first = markov_leader(g, constant(g, kContinue));
  for (auto& r : take_first.rules) r.dist[0] = {1, 0};
  EXPECT_EQ(evaluate_joint_policy(sp, take_first, markov_follower(g, constant(g, kContinue))),
            std::make_pair(1.0, 0.0));

  auto cont = markov_leader(g, constant(g, kContinue));
  EXPECT_EQ(evaluate_joint_policy(sp, cont, markov_follower(g, constant(g, kContinue))), std::make_pair(3.0, 3.0));

  auto late_take = constant(g, kContinue);
  for (auto& row : late_take) row[3] = kTake;
  EXPECT_EQ(evaluate_joint_policy(sp, cont, markov_follower(g, late_take)), std::make_pair(2.0, 4.0));
}

TEST(Occupancy, ConditioningAndReassembly) {
  Game g = make_dec_tiger(3);
  HistorySpace sp(g);
  OccupancyState o;
  o.stage = 1;
  HistId r0 = sp.L.root(0), f0 = sp.F.root(0);
  HistId l1 = sp.extend_leader(r0, 0, 0), l2 = sp.extend_leader(r0, 1, 1);
  HistId f1 = sp.extend_follower(f0, 0, 0), f2 = sp.extend_follower(f0, 0, 1);
  o.support = {{0, l1, f1, 0.3}, {1, l2, f2, 0.7}};
  std::sort(o.support.begin(), o.support.end(), entry_less);
  auto parts = condition_on_follower(o);
  ASSERT_EQ(parts.size(), 2u);
  std::vector<double> w{parts[0].weight, parts[1].weight};
  std::sort(w.begin(), w.end());
  EXPECT_DOUBLE_EQ(w[0], 0.3);
  EXPECT_DOUBLE_EQ(w[1], 0.7);
  EXPECT_NEAR(l1_distance(reassemble(parts, 1, 0, 0), o), 0, 1e-9);

  auto single = condition_on_follower(initial_occupancy(sp));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].weight, 1.0);
}

TEST(Occupancy, ReassemblyOnBenchmarkRollouts) {
  std::mt19937_64 rng(3);
  for (const auto& n : benchmark_names()) {
    Game g = make_benchmark(n, 3);
    HistorySpace sp(g);
    CredibleSet c = initial_credible_set(sp);
    for (int t = 0; t < 2; ++t) {
      LeaderRule d;
      d.stage = t;
      for (HistId h : leader_histories(c)) d.dist[h] = std::vector<double>(g.nAL(), 1.0 / g.nAL());
      c = credible_transition(c, d, sp);
    }
    for (const auto& o : c.members) {
      auto back = reassemble(condition_on_follower(o), o.stage, o.rhoL, o.rhoF);
      EXPECT_NEAR(l1_distance(back, o), 0, 1e-9) << n;
      auto [rl, rf] = recompute_rho(o, sp);
      EXPECT_NEAR(rl, o.rhoL, 1e-9) << n;
      EXPECT_NEAR(rf, o.rhoF, 1e-9) << n;
    }
  }
}

TEST(Occupancy, ConditionalStep) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  auto oc = condition_on_follower(initial_occupancy(sp))[0];
  LeaderRule d;
  d.dist[sp.L.root(0)] = {0.5, 0.5};
  for (int aF = 0; aF < 2; ++aF) {
    auto [eta, next] = conditional_step(oc, d, aF, 0, sp);
    EXPECT_DOUBLE_EQ(eta, 0.5);
    double tot = 0;
    for (auto& e : next.support) tot += e.p;
    EXPECT_DOUBLE_EQ(tot, 1.0);
  }

  Game c = make_centipede(3);
  HistorySpace cs(c);
  auto oc2 = condition_on_follower(initial_occupancy(cs))[0];
  LeaderRule cont;
  cont.dist[cs.L.root(0)] = {0, 1};
  auto [eta1, pm] = conditional_step(oc2, cont, 0, 1, cs);
  EXPECT_EQ(eta1, 1.0);
  ASSERT_EQ(pm.support.size(), 1u);
  EXPECT_EQ(pm.support[0].p, 1.0);
  auto [eta0, empty] = conditional_step(oc2, cont, 0, 2, cs);
  EXPECT_EQ(eta0, 0.0);
  EXPECT_TRUE(empty.support.empty());
}

TEST(Occupancy, L1Distance) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  HistId r0 = sp.L.root(0), f0 = sp.F.root(0);
  HistId a = sp.extend_leader(r0, 0, 0), b = sp.extend_leader(r0, 0, 1);
  HistId fa = sp.extend_follower(f0, 0, 0), fb = sp.extend_follower(f0, 0, 1);
  auto make = [&](double p) {
    OccupancyState o;
    o.stage = 1;
    o.support = {{0, a, fa, p}, {1, b, fb, 1 - p}};
    std::sort(o.support.begin(), o.support.end(), entry_less);
    return o;
  };
  auto o1 = make(0.3), o2 = make(0.5), pa = make(1), pb = make(0);
  pa.support.pop_back();
  pb.support.erase(pb.support.begin());
  EXPECT_EQ(l1_distance(o1, o1), 0);
  EXPECT_NEAR(l1_distance(o1, o2), 0.4, 1e-12);
  EXPECT_NEAR(l1_distance(pa, pb), 2, 1e-12);
  OccupancyState other = o1;
  other.stage = 2;
  EXPECT_THROW(l1_distance(o1, other), DomainError);
}
