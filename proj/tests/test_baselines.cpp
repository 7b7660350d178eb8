#include <gtest/gtest.h>

#include "sse/baselines.hpp"
#include "sse/benchmarks.hpp"
#include "sse/pbvi.hpp"
#include "support.hpp"

using namespace sse;

namespace {

LeaderPolicy as_leader_policy(const std::vector<std::vector<std::vector<double>>>& rows) {
  LeaderPolicy p;
  p.markov = true;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    LeaderRule r;
    r.stage = int(t);
    for (std::size_t s = 0; s < rows[t].size(); ++s) r.dist[HistId(s)] = rows[t][s];
    p.rules.push_back(r);
  }
  return p;
}

LeaderPolicy always(const Game& g, int a) {
  std::vector<double> d(g.nAL(), 0.0);
  d[a] = 1;
  return as_leader_policy(std::vector<std::vector<std::vector<double>>>(
      g.horizon, std::vector<std::vector<double>>(g.nS(), d)));
}

}  // namespace

TEST(Baselines, PolicyCounts) {
  EXPECT_EQ(policy_count_string(make_dec_tiger(3), Player::Leader, 3), "2^21");
  EXPECT_EQ(policy_count_string(make_centipede(3), Player::Follower, 3), "2^73");
  EXPECT_EQ(policy_count_string(make_patrolling(1), Player::Follower, 1), "3^1");
  EXPECT_DOUBLE_EQ(policy_count_log2(make_dec_tiger(3), Player::Leader, 3), 21);
  EXPECT_TRUE(fits_cap(make_dec_tiger(2), 2));
  EXPECT_FALSE(fits_cap(make_centipede(3), 3));
}

TEST(Baselines, EnumerationMatchesClosedForm) {
  Game g = make_dec_tiger(2);
  std::set<std::vector<int>> seen;
  double n = for_each_deterministic_policy(g, Player::Leader, 2, [&](const auto& hs, const auto& act) {
    EXPECT_EQ(hs.size(), 5u);
    seen.insert(act);
  });
  EXPECT_EQ(n, 32);
  EXPECT_EQ(seen.size(), 32u);
  EXPECT_THROW(for_each_deterministic_policy(make_centipede(3), Player::Leader, 3, [](auto&, auto&) {}),
               CapacityError);
}

TEST(Baselines, CentipedeBestResponseBreaksTiesForTheLeader) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  auto br = follower_best_response(sp, always(g, 1));
  EXPECT_EQ(br.vF, 2);
  EXPECT_EQ(br.vL, 2);
  auto en = follower_best_response_enum(sp, always(g, 1));
  EXPECT_EQ(en.vF, 2);
  EXPECT_EQ(en.vL, 2);
  EXPECT_GE(en.argmax.size(), 2u);
}

TEST(Baselines, BestResponseDpMatchesEnumeration) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    fixtures::RandomGameSpec gs;
    gs.nS = 2 + i % 2;
    gs.horizon = 2 + i % 2;
    Game g = fixtures::random_game(rng, gs);
    HistorySpace sp(g);
    auto pol = as_leader_policy(fixtures::random_markov_policy(rng, g));
    auto dp = follower_best_response(sp, pol);
    auto en = follower_best_response_enum(sp, pol);
    EXPECT_NEAR(dp.vF, en.vF, 1e-9) << i;
    EXPECT_NEAR(dp.vL, en.vL, 1e-9) << i;
    // the recorded policy achieves what it claims
    auto [l, f] = evaluate_joint_policy(sp, pol, dp.policy);
    EXPECT_NEAR(l, dp.vL, 1e-9);
    EXPECT_NEAR(f, dp.vF, 1e-9);
  }
}

TEST(Baselines, BackwardInductionOnCentipedeTakesFirst) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  auto r = backward_induction(g, BiMode::Full, sp);
  EXPECT_NEAR(r.value, 1, 1e-9);
  EXPECT_NEAR(measured_exploitability(sp, r.leader, r.planned_value), 0, 1e-9);
}

TEST(Baselines, TigerInductionBothModes) {
  Game g = make_dec_tiger(3);
  HistorySpace sp(g);
  EXPECT_NEAR(backward_induction(g, BiMode::Full, sp).value, 60, 1e-9);
  EXPECT_NEAR(backward_induction(g, BiMode::Myopic, sp).value, 60, 1e-9);
}

TEST(Baselines, MatchInductionCannotDeter) {
  Game g = make_match(3);
  HistorySpace sp(g);
  EXPECT_NEAR(backward_induction(g, BiMode::Full, sp).value, -1000, 1e-9);
  EXPECT_NEAR(backward_induction(g, BiMode::Myopic, sp).value, -1000, 1e-9);
}

TEST(Baselines, NormalFormAgreesWithPbviOnShortHorizons) {
  for (const auto& n : benchmark_names())
    for (int h : {1, 2}) {
      Game g = make_benchmark(n, h);
      HistorySpace sp(g);
      double lp = nf_lp_sse(sp).value, milp = nf_milp_sse(sp).value;
      double pb = solve_sse(g, {}, sp).value;
      EXPECT_NEAR(lp, milp, 1e-6) << n << " " << h;
      EXPECT_NEAR(lp, pb, 1e-6) << n << " " << h;
    }
}

TEST(Baselines, NormalFormBehaviourSecuresTheValue) {
  Game g = make_centipede(2);
  HistorySpace sp(g);
  auto r = nf_lp_sse(sp);
  EXPECT_NEAR(measured_exploitability(sp, r.behaviour, r.value), 0, 1e-6);
  double mass = 0;
  for (auto& [p, d] : r.mixture) mass += p;
  EXPECT_NEAR(mass, 1, 1e-9);
}

TEST(Baselines, NormalFormRefusesAboveTheCap) {
  Game g = make_centipede(3);
  HistorySpace sp(g);
  try {
    nf_lp_sse(sp);
    FAIL() << "no capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("2^73"), std::string::npos) << e.what();
  }
  EXPECT_THROW(nf_milp_sse(sp), CapacityError);
}
