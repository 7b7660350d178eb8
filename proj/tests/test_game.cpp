#include <gtest/gtest.h>

#include <filesystem>

#include "sse/benchmarks.hpp"
#include "sse/milp.hpp"

using namespace sse;

namespace {

// Two states, two actions each; everything moves to state 1.
Game two_state(double reward = 1) {
  Game g = detail::blank({"a", "b"}, {"x", "y"}, {"u", "v"}, 3);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        g.set_p(s, a, b, 1, 1.0);
        g.set_r(s, a, b, 1, a == b ? reward : 0, a != b ? reward : 0);
      }
  g.finalize();
  return g;
}

}  // namespace

TEST(Game, WellFormedGameHasEmptyReport) { EXPECT_TRUE(validate_game(two_state()).empty()); }

TEST(Game, ShortRowIsReportedWithItsKey) {
  Game g = two_state();
  g.set_p(0, 1, 0, 1, 0.9);
  auto rep = validate_game(g);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_NE(rep[0].find("(a, y, u)"), std::string::npos) << rep[0];
}

TEST(Game, BenchmarksValidate) {
  for (const auto& n : benchmark_names())
    for (int h : {1, 3, 6}) EXPECT_TRUE(validate_game(make_benchmark(n, h)).empty()) << n << " " << h;
  EXPECT_TRUE(validate_game(make_centipede(4, CentipedeLayout::Terminals)).empty());
}

TEST(Game, BadDiscountAndHorizonAreReported) {
  Game g = two_state();
  g.gamma = 0;
  g.horizon = 0;
  EXPECT_EQ(validate_game(g).size(), 2u);
}

TEST(Game, TruncationHorizon) {
  EXPECT_EQ(truncation_horizon(0.5, 1, 1), 1);
  EXPECT_EQ(truncation_horizon(0.9, 0.1, 10), 66);
  EXPECT_EQ(truncation_horizon(0.5, 7 / 0.5, 7), 1);
  EXPECT_THROW(truncation_horizon(1.0, 0.1, 1), DomainError);
  EXPECT_THROW(truncation_horizon(0.5, 0, 1), DomainError);
}

TEST(Game, JsonRoundTrip) {
  for (const auto& n : benchmark_names()) {
    Game g = make_benchmark(n, 2);
    Game h = game_from_json(game_to_json(g));
    EXPECT_EQ(h.states, g.states);
    EXPECT_EQ(h.initial_state, g.initial_state);
    EXPECT_EQ(h.horizon, g.horizon);
    EXPECT_EQ(h.P, g.P);
    EXPECT_EQ(h.RL, g.RL);
    EXPECT_EQ(h.RF, g.RF);
  }
}

TEST(Game, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "sse_game_roundtrip.json";
  save_game(make_mabc(3), path.string());
  Game h = load_game(path.string());
  EXPECT_EQ(h.P, make_mabc(3).P);
  std::filesystem::remove(path);
  EXPECT_THROW(load_game("/nonexistent/game.json"), ParseError);
}

TEST(Game, UnknownNamesAreParseErrors) {
  auto j = game_to_json(two_state());
  j["initial_state"] = "nowhere";
  EXPECT_THROW(game_from_json(j), ParseError);
}

TEST(Game, EquivalentActionsAreMerged) {
  // at the follower's Centipede states the leader's two actions coincide
  Game g = make_centipede(4);
  EXPECT_EQ(g.leader_choices(0).size(), 2u);
  EXPECT_EQ(g.leader_choices(1).size(), 1u);
  EXPECT_EQ(g.canonical_leader(1, 1), 0);
  EXPECT_EQ(g.follower_choices(0).size(), 1u);
  EXPECT_EQ(g.follower_choices(1).size(), 2u);
}

TEST(Game, BigM) {
  Game g = two_state(1);
  EXPECT_DOUBLE_EQ(big_m(g), 7);
  EXPECT_DOUBLE_EQ(big_m(two_state(0)), 1);
  Game w = two_state(4);
  w.horizon = 6;
  EXPECT_DOUBLE_EQ(big_m(w), 49);
}
