#include <gtest/gtest.h>

#include <random>

#include "sse/benchmarks.hpp"
#include "sse/vectors.hpp"

using namespace sse;

namespace {

struct Fixture {
  Game g = make_dec_tiger(2);
  HistorySpace sp{g};
  VectorStore store;

  VectorSet& set_at_root(std::vector<std::pair<double, double>> lf) {
    VectorSet& G = store.make(0);
    G.set_domain({sp.L.root(0), sp.L.root(1)}, sp.L);
    for (auto [l, f] : lf) {
      AlphaPair a;
      a.L = {l, l};
      a.F = {f, f};
      G.pairs.push_back(a);
    }
    return G;
  }
  ConditionalOccupancy root_cond() { return condition_on_follower(initial_occupancy(sp))[0]; }
};

}  // namespace

TEST(Vectors, FilteredArgmax) {
  Fixture fx;
  auto x = fx.root_cond();
  EXPECT_EQ(filtered_argmax(fx.set_at_root({{1, 1}}), x, fx.sp.L), std::vector<int>{0});
  EXPECT_EQ(filtered_argmax(fx.set_at_root({{9, 3}, {0, 5}}), x, fx.sp.L), std::vector<int>{1});
  EXPECT_EQ(filtered_argmax(fx.set_at_root({{9, 5}, {0, 5 + 1e-10}}), x, fx.sp.L), (std::vector<int>{0, 1}));
  EXPECT_THROW(filtered_argmax(fx.store.make(0), x, fx.sp.L), DomainError);
}

TEST(Vectors, SelectPairBreaksTiesForTheLeader) {
  Fixture fx;
  EXPECT_EQ(select_pair(fx.set_at_root({{1, 5}, {4, 5}, {9, 2}}), fx.root_cond(), fx.sp.L), 1);
}

TEST(Vectors, EvaluateVectorSet) {
  Fixture fx;
  OccupancyState o = initial_occupancy(fx.sp);
  o.rhoL = 3;
  o.rhoF = -1;
  VectorSet& z = fx.store.make(0);
  make_zero_set(z);
  EXPECT_EQ(evaluate_vectorset(z, o, Player::Leader, fx.sp), 3);
  EXPECT_EQ(evaluate_vectorset(z, o, Player::Follower, fx.sp), -1);
  VectorSet& G = fx.set_at_root({{2, 7}});
  EXPECT_EQ(evaluate_vectorset(G, o, Player::Leader, fx.sp), 5);
  EXPECT_EQ(evaluate_vectorset(G, o, Player::Follower, fx.sp), 6);
  EXPECT_THROW(evaluate_vectorset(fx.store.make(0), o, Player::Leader, fx.sp), DomainError);
}

TEST(Vectors, LeaderValueOfSingletons) {
  Fixture fx;
  CredibleSet c = initial_credible_set(fx.sp);
  VectorSet& G = fx.set_at_root({{2, 7}, {4, 1}});
  auto v = leader_value(fx.store, {G.id}, c, fx.sp);
  EXPECT_EQ(v.value, evaluate_vectorset(G, c.members[0], Player::Leader, fx.sp));
  EXPECT_EQ(v.value, 2);
  EXPECT_THROW(leader_value(fx.store, {}, c, fx.sp), DomainError);
}

TEST(Vectors, NearestNeighbourValue) {
  Fixture fx;
  CredibleSet a = initial_credible_set(fx.sp);
  a.members[0].rhoL = 1;  // values do not enter the distance
  std::map<int, CredibleSet> samples{{0, a}};
  EXPECT_EQ(nearest_neighbour_value({{0, 11.0}}, samples, a), 11);

  // two samples at equal distance from the query
  CredibleSet q = a, b1 = a, b2 = a;
  HistId l0 = fx.sp.L.root(0), l1 = fx.sp.L.root(1);
  HistId f0 = fx.sp.F.root(0), f1 = fx.sp.F.root(1);
  q.members[0].support = {{0, l0, f0, 0.5}, {1, l1, f1, 0.5}};
  b1.members[0].support = {{0, l0, f0, 1.0}};
  b2.members[0].support = {{1, l1, f1, 1.0}};
  samples = {{1, b1}, {2, b2}};
  EXPECT_EQ(nearest_neighbour_value({{1, 5.0}, {2, 3.0}}, samples, q), 3);
  EXPECT_THROW(nearest_neighbour_value({}, {}, q), DomainError);
}

TEST(Vectors, NearestNeighbourMatchesScan) {
  Fixture fx;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  HistId l0 = fx.sp.L.root(0), l1 = fx.sp.L.root(1), f0 = fx.sp.F.root(0), f1 = fx.sp.F.root(1);
  auto random_set = [&] {
    CredibleSet c;
    OccupancyState o;
    double p = u(rng);
    o.support = {{0, l0, f0, p}, {1, l1, f1, 1 - p}};
    c.members = {o};
    return c;
  };
  for (int rep = 0; rep < 20; ++rep) {
    std::map<int, CredibleSet> s{{0, random_set()}, {1, random_set()}, {2, random_set()}};
    std::map<int, double> v{{0, u(rng)}, {1, u(rng)}, {2, u(rng)}};
    CredibleSet q = random_set();
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (hausdorff_distance(q, s[i]) < hausdorff_distance(q, s[best])) best = i;
    EXPECT_EQ(nearest_neighbour_value(v, s, q), v[best]);
  }
}

TEST(Vectors, TerminalBackupIsOneStepReward) {
  // deterministic chain: one state, leader action a pays (a, 2a)
  Game g = detail::blank({"s"}, {"x", "y"}, {"u"}, 1);
  for (int a = 0; a < 2; ++a) {
    g.set_p(0, a, 0, 0, 1);
    g.set_r(0, a, 0, 0, a, 2 * a);
  }
  g.finalize();
  HistorySpace sp(g);
  VectorStore store;
  VectorSet& z = store.make(1);
  make_zero_set(z);
  CredibleSet c = initial_credible_set(sp);
  CondIndex ix = index_conditionals(c);
  LeaderRule d;
  d.dist[sp.L.root(0)] = {0.25, 0.75};
  Selection sel;
  sel.kappa = {0};
  sel.w = {{{0, 0}}};
  VectorSet& G = store.make(0);
  build_vector_set(G, c, ix, d, sel, z, sp);
  ASSERT_EQ(G.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(G.pairs[0].L[0], 0.75);
  EXPECT_DOUBLE_EQ(G.pairs[0].F[0], 1.5);
  EXPECT_DOUBLE_EQ(evaluate_vectorset(G, c.members[0], Player::Leader, sp), 0.75);

  Selection bad;
  EXPECT_THROW(build_vector_set(store.make(0), c, ix, d, bad, z, sp), DomainError);
}
