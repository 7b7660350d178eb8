#include <gtest/gtest.h>

#include <set>

#include "sse/benchmarks.hpp"
#include "sse/credible.hpp"
#include "support.hpp"

using namespace sse;

namespace {

LeaderRule uniform_over(const CredibleSet& c, std::vector<double> d) {
  LeaderRule r;
  r.stage = c.stage;
  for (HistId h : leader_histories(c)) r.dist[h] = d;
  return r;
}

std::set<std::pair<double, double>> values(const CredibleSet& c) {
  std::set<std::pair<double, double>> v;
  for (const auto& o : c.members) v.insert({o.rhoL, o.rhoF});
  return v;
}

// Point-mass member on (s, hL, hF) with the given accrued values.
OccupancyState point(int stage, int s, HistId hL, HistId hF, double l, double f) {
  OccupancyState o;
  o.stage = stage;
  o.support = {{s, hL, hF, 1.0}};
  o.rhoL = l;
  o.rhoF = f;
  return o;
}

const std::vector<double> kCont{0, 1}, kTake{1, 0};

}  // namespace

TEST(Credible, CentipedeFirstTransitions) {
  Game g = make_centipede(4, CentipedeLayout::Terminals);
  HistorySpace sp(g);
  CredibleSet c0 = initial_credible_set(sp);
  CredibleSet take = credible_transition(c0, uniform_over(c0, kTake), sp);
  EXPECT_EQ(values(take), (std::set<std::pair<double, double>>{{1, 0}}));
  EXPECT_EQ(take.members[0].support[0].s, g.state_id("t1"));

  CredibleSet c1 = credible_transition(c0, uniform_over(c0, kCont), sp);
  ASSERT_EQ(c1.members.size(), 1u);
  CredibleSet c2 = credible_transition(c1, uniform_over(c1, kCont), sp);
  EXPECT_EQ(values(c2), (std::set<std::pair<double, double>>{{0, 0}, {0, 2}}));
  std::set<int> states;
  for (const auto& o : c2.members) states.insert(o.support[0].s);
  EXPECT_EQ(states, (std::set<int>{g.state_id("s3"), g.state_id("t2")}));
}

TEST(Credible, FilterLeavesCentipedeTerminalSetAlone) {
  Game g = make_centipede(4, CentipedeLayout::Terminals);
  HistorySpace sp(g);
  CredibleSet c = initial_credible_set(sp);
  for (int t = 0; t < 4; ++t) c = credible_transition(c, uniform_over(c, kCont), sp);
  EXPECT_EQ(values(c), (std::set<std::pair<double, double>>{{0, 2}, {2, 4}, {3, 3}}));
  CredibleSet f = filter(c, g.nS());
  EXPECT_EQ(f.members.size(), c.members.size());
  EXPECT_EQ(hausdorff_distance(f, c), 0);
  EXPECT_EQ(terminal_reward(c), 2);
}

TEST(Credible, FilterDropsDominatedMembers) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  HistId l = sp.L.root(0), f0 = sp.F.root(0), f1 = sp.F.root(1);
  CredibleSet c;
  c.members = {point(0, 0, l, f0, 1, 1), point(0, 0, l, f1, 2, 2)};
  canonicalize(c);
  auto out = filter(c, g.nS());
  EXPECT_EQ(values(out), (std::set<std::pair<double, double>>{{2, 2}}));

  c.members = {point(0, 0, l, f0, 2, 2), point(0, 0, l, f1, 2, 2)};
  canonicalize(c);
  EXPECT_EQ(filter(c, g.nS()).members.size(), 1u);

  // same values, different beliefs: both stay
  c.members = {point(0, 0, l, f0, 1, 1), point(0, 1, sp.L.root(1), f1, 2, 2)};
  canonicalize(c);
  EXPECT_EQ(filter(c, g.nS()).members.size(), 2u);
}

TEST(Credible, FilterIsIdempotent) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    fixtures::RandomGameSpec gs;
    gs.nS = 3;
    gs.horizon = 3;
    Game g = fixtures::random_game(rng, gs);
    HistorySpace sp(g);
    CredibleSet c = initial_credible_set(sp);
    for (int t = 0; t < 2; ++t) c = credible_transition(c, uniform_over(c, {0.5, 0.5}), sp);
    auto f = filter(c, g.nS());
    EXPECT_EQ(hausdorff_distance(filter(f, g.nS()), f), 0);
    EXPECT_LE(f.members.size(), c.members.size());
    EXPECT_EQ(terminal_reward(f), terminal_reward(c));
  }
}

TEST(Credible, TerminalReward) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  HistId l = sp.L.root(0);
  CredibleSet c;
  c.members = {point(0, 0, l, sp.F.root(0), 7, 1)};
  EXPECT_EQ(terminal_reward(c), 7);
  c.members = {point(0, 0, l, sp.F.root(0), 1, 5), point(0, 1, sp.L.root(1), sp.F.root(1), 4, 5)};
  EXPECT_EQ(terminal_reward(c), 4);
}

TEST(Credible, SingleFollowerActionKeepsSize) {
  Game g = detail::blank({"a", "b"}, {"x", "y"}, {"u"}, 2);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      g.set_p(s, a, 0, a, 1);
      g.set_r(s, a, 0, a, a, 1 - a);
    }
  g.finalize();
  HistorySpace sp(g);
  CredibleSet c = initial_credible_set(sp);
  for (int t = 0; t < 2; ++t) {
    auto n = credible_transition(c, uniform_over(c, {0.5, 0.5}), sp);
    EXPECT_EQ(n.members.size(), c.members.size());
    c = n;
  }
}

TEST(Credible, CapacityErrorAdvisesSampling) {
  Game g = make_mabc(6);
  HistorySpace sp(g);
  CredibleSet c = initial_credible_set(sp);
  try {
    for (int t = 0; t < 6; ++t) c = credible_transition(c, uniform_over(c, {0.5, 0.5}), sp, 64);
    FAIL() << "no capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("sampled"), std::string::npos);
  }
}

TEST(Credible, HausdorffDistance) {
  Game g = make_dec_tiger(2);
  HistorySpace sp(g);
  HistId l0 = sp.L.root(0), l1 = sp.L.root(1);
  auto o1 = point(0, 0, l0, sp.F.root(0), 0, 0), o2 = point(0, 1, l1, sp.F.root(1), 0, 0);
  o2.support = {{0, l0, sp.F.root(0), 0.5}, {1, l1, sp.F.root(1), 0.5}};
  CredibleSet a, b;
  a.members = {o1, o2};
  b.members = {o1};
  EXPECT_EQ(hausdorff_distance(a, a), 0);
  CredibleSet s1, s2;
  s1.members = {o1};
  s2.members = {o2};
  EXPECT_DOUBLE_EQ(hausdorff_distance(s1, s2), l1_distance(o1, o2));
  EXPECT_DOUBLE_EQ(hausdorff_distance(a, b), l1_distance(o2, o1));
  CredibleSet late;
  late.stage = 1;
  EXPECT_THROW(hausdorff_distance(a, late), DomainError);
}

TEST(Credible, FilteringPreservesTerminalRewardOnRandomGames) {
  std::mt19937_64 rng(17);
  int done = 0;
  while (done < 25) {
    fixtures::RandomGameSpec gs;
    gs.nS = 3;
    gs.nAF = 3;
    gs.horizon = 3;
    Game g = fixtures::random_game(rng, gs);
    try {
      auto [full, filt] = fixtures::filtered_vs_unfiltered(g, fixtures::random_markov_policy(rng, g));
      EXPECT_EQ(full, filt);
      ++done;
    } catch (const CapacityError&) {
      // the unfiltered set outgrew the cap; draw another game
    }
  }
}
