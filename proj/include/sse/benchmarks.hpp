#pragma once

#include <string>
#include <vector>

#include "sse/game.hpp"

namespace sse {

namespace detail {

inline Game blank(std::vector<std::string> S, std::vector<std::string> AL, std::vector<std::string> AF, int horizon) {
  Game g;
  g.states = std::move(S);
  g.leader_actions = std::move(AL);
  g.follower_actions = std::move(AF);
  g.horizon = horizon;
  g.gamma = 1.0;
  g.resize();
  return g;
}

// Same move and payoff for every opponent action.
inline void any_opponent(Game& g, int s, int a, bool leader_moves, int s2, double l, double f) {
  int n = leader_moves ? g.nAF() : g.nAL();
  for (int b = 0; b < n; ++b) {
    int aL = leader_moves ? a : b, aF = leader_moves ? b : a;
    g.set_p(s, aL, aF, s2, 1.0);
    g.set_r(s, aL, aF, s2, l, f);
  }
}

inline void absorbing(Game& g, int s) {
  for (int a = 0; a < g.nAL(); ++a)
    for (int b = 0; b < g.nAF(); ++b) g.set_p(s, a, b, s, 1.0);
}

}  // namespace detail

enum class CentipedeLayout {
  Compact,   // s1..sl plus one absorbing end state
  Terminals  // one terminal per exit, matching the textbook tree
};

// Leader moves at odd stages, follower at even ones. Taking at stage k pays
// the mover k and the other player max(k-2, 0); continuing past the last
// stage pays both l-1.
inline Game make_centipede(int horizon, CentipedeLayout layout = CentipedeLayout::Compact) {
  if (horizon < 1) throw DomainError("centipede: horizon must be >= 1");
  std::vector<std::string> S;
  for (int k = 1; k <= horizon; ++k) S.push_back("s" + std::to_string(k));
  if (layout == CentipedeLayout::Compact)
    S.push_back("end");
  else
    for (int k = 1; k <= horizon + 1; ++k) S.push_back("t" + std::to_string(k));
  Game g = detail::blank(S, {"take", "continue"}, {"take", "continue"}, horizon);
  auto exit_state = [&](int k) { return layout == CentipedeLayout::Compact ? horizon : horizon + k - 1; };
  for (int k = 1; k <= horizon; ++k) {
    int s = k - 1;
    bool leader = k % 2 == 1;
    double mover = k, other = std::max(k - 2, 0);
    detail::any_opponent(g, s, 0, leader, exit_state(k), leader ? mover : other, leader ? other : mover);
    if (k < horizon)
      detail::any_opponent(g, s, 1, leader, s + 1, 0, 0);
    else
      detail::any_opponent(g, s, 1, leader, exit_state(k + 1), horizon - 1, horizon - 1);
  }
  for (int s = horizon; s < g.nS(); ++s) detail::absorbing(g, s);
  g.metadata = {{"benchmark", "centipede"},
                {"layout", layout == CentipedeLayout::Compact ? "compact" : "terminals"}};
  g.finalize();
  return g;
}

// Follower first picks defect (+1 to itself, -1000 to the leader) or
// cooperate; the leader then sees which and may punish (-2 to the follower)
// before the cycle restarts.
inline Game make_match(int horizon, double penalty = 1000) {
  Game g = detail::blank({"s0", "sD", "sC", "sX"}, {"punish", "spare"}, {"defect", "cooperate"}, horizon);
  for (int a = 0; a < 2; ++a) {
    g.set_p(0, a, 0, 1, 1.0);
    g.set_r(0, a, 0, 1, -penalty, 1);
    g.set_p(0, a, 1, 2, 1.0);
    for (int b = 0; b < 2; ++b) {
      g.set_p(1, a, b, 3, 1.0);
      g.set_p(2, a, b, 3, 1.0);
    }
  }
  detail::any_opponent(g, 3, 0, true, 0, 0, -2);
  detail::any_opponent(g, 3, 1, true, 0, 0, 0);
  g.metadata = {{"benchmark", "match"}};
  g.finalize();
  return g;
}

// Fully observable tiger: +20 each when both open the safe door, -50 each
// when anyone opens the tiger door; the tiger is resampled every stage.
inline Game make_dec_tiger(int horizon) {
  Game g = detail::blank({"tiger_left", "tiger_right"}, {"open_left", "open_right"}, {"open_left", "open_right"},
                         horizon);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        bool safe = a != s && b != s;
        for (int s2 = 0; s2 < 2; ++s2) {
          g.set_p(s, a, b, s2, 0.5);
          g.set_r(s, a, b, s2, safe ? 20 : -50, safe ? 20 : -50);
        }
      }
  g.metadata = {{"benchmark", "dec_tiger"}};
  g.finalize();
  return g;
}

// Two-node broadcast channel. State is the pair of buffer bits; a lone send
// from a full buffer succeeds (reward 1 to both) and empties it, then empty
// buffers refill with probability 0.9 (leader) and 0.1 (follower).
inline Game make_mabc(int horizon, double refill_leader = 0.9, double refill_follower = 0.1) {
  Game g = detail::blank({"b00", "b01", "b10", "b11"}, {"wait", "send"}, {"wait", "send"}, horizon);
  g.initial_state = 3;
  auto prob = [](int full, int next, double q) { return full ? double(next) : (next ? q : 1 - q); };
  for (int s = 0; s < 4; ++s) {
    int bl = s >> 1, bf = s & 1;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int nl = bl, nf = bf;
        double r = 0;
        if (a == 1 && b == 0 && bl) { r = 1; nl = 0; }
        if (b == 1 && a == 0 && bf) { r = 1; nf = 0; }
        for (int s2 = 0; s2 < 4; ++s2) {
          double p = prob(nl, s2 >> 1, refill_leader) * prob(nf, s2 & 1, refill_follower);
          if (p <= 0) continue;
          g.set_p(s, a, b, s2, p);
          g.set_r(s, a, b, s2, r, r);
        }
      }
  }
  g.metadata = {{"benchmark", "mabc"}};
  g.finalize();
  return g;
}

// Zero-sum patrol of two targets. The defender stays or moves; the attacker
// waits or hits a target, winning 1 unless the defender lands on it.
inline Game make_patrolling(int horizon) {
  Game g = detail::blank({"at_T1", "at_T2"}, {"stay", "move"}, {"wait", "attack_T1", "attack_T2"}, horizon);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      int s2 = a == 0 ? s : 1 - s;
      for (int b = 0; b < 3; ++b) {
        g.set_p(s, a, b, s2, 1.0);
        double f = b == 0 ? 0 : (b - 1 == s2 ? -1 : 1);
        g.set_r(s, a, b, s2, -f, f);
      }
    }
  g.metadata = {{"benchmark", "patrolling"}};
  g.finalize();
  return g;
}

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> n{"centipede", "match", "dec_tiger", "mabc", "patrolling"};
  return n;
}

inline Game make_benchmark(const std::string& name, int horizon) {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (name == "centipede") return make_centipede(horizon);
  if (name == "match") return make_match(horizon);
  if (name == "dec_tiger" || name == "tiger") return make_dec_tiger(horizon);
  if (name == "mabc") return make_mabc(horizon);
  if (name == "patrolling") return make_patrolling(horizon);
  throw DomainError("unknown benchmark '" + name + "'");
}

}  // namespace sse
