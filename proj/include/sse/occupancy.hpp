#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sse/history.hpp"

namespace sse {

inline constexpr double kDropTol = 1e-12;

// Stochastic leader rule for one stage: history -> distribution over leader
// actions (dense over the game's leader action ids).
struct LeaderRule {
  int stage = 0;
  std::unordered_map<HistId, std::vector<double>> dist;

  const std::vector<double>& at(HistId h) const {
    auto it = dist.find(h);
    if (it == dist.end()) throw DomainError("leader rule at stage " + std::to_string(stage) + " does not cover history " + std::to_string(h));
    return it->second;
  }
  bool covers(HistId h) const { return dist.count(h) > 0; }
};

// Deterministic follower rule for one stage.
struct FollowerRule {
  int stage = 0;
  std::unordered_map<HistId, int> act;

  int at(HistId h) const {
    auto it = act.find(h);
    if (it == act.end()) throw DomainError("follower rule at stage " + std::to_string(stage) + " does not cover history " + std::to_string(h));
    return it->second;
  }
};

// Stage-indexed policies. With markov set, rules are keyed by state id instead
// of history id.
struct LeaderPolicy {
  std::vector<LeaderRule> rules;
  bool markov = false;

  const std::vector<double>& at(int t, const HistorySpace& sp, HistId h) const {
    if (t >= int(rules.size())) throw DomainError("leader policy does not cover stage " + std::to_string(t));
    return rules[t].at(markov ? sp.L.state(h) : h);
  }
};

struct FollowerPolicy {
  std::vector<FollowerRule> rules;
  bool markov = false;

  int at(int t, const HistorySpace& sp, HistId h) const {
    if (t >= int(rules.size())) throw DomainError("follower policy does not cover stage " + std::to_string(t));
    return rules[t].at(markov ? sp.F.state(h) : h);
  }
};

struct Entry {
  int s;
  HistId hL, hF;
  double p;
};

// Distribution over (state, leader history, follower history) at a stage, with
// the expected discounted reward accrued so far. Support is sorted by (hL, hF).
struct OccupancyState {
  int stage = 0;
  std::vector<Entry> support;
  double rhoL = 0, rhoF = 0;

  double rho(Player who) const { return who == Player::Leader ? rhoL : rhoF; }
};

inline bool entry_less(const Entry& a, const Entry& b) {
  return a.hL != b.hL ? a.hL < b.hL : a.hF < b.hF;
}

inline OccupancyState initial_occupancy(HistorySpace& sp) {
  int s0 = sp.game->initial_state;
  OccupancyState o;
  o.support.push_back({s0, sp.L.root(s0), sp.F.root(s0), 1.0});
  return o;
}

namespace detail {
struct PairHash {
  std::size_t operator()(const std::pair<HistId, HistId>& k) const {
    return std::hash<std::uint64_t>()((std::uint64_t(std::uint32_t(k.first)) << 32) | std::uint32_t(k.second));
  }
};

// Drops float dust and renormalizes; keeps the sorted-support invariant.
inline void compact(std::vector<Entry>& v) {
  std::sort(v.begin(), v.end(), entry_less);
  double total = 0;
  std::vector<Entry> out;
  out.reserve(v.size());
  for (const auto& e : v)
    if (e.p > kDropTol) {
      out.push_back(e);
      total += e.p;
    }
  if (total > 0)
    for (auto& e : out) e.p /= total;
  v.swap(out);
}
}  // namespace detail

// Deterministic occupancy transition under a joint rule given as callables
// (history -> leader distribution, history -> follower action).
template <class LeaderFn, class FollowerFn>
OccupancyState tau_advance_fn(const OccupancyState& o, LeaderFn&& dL, FollowerFn&& dF, HistorySpace& sp) {
  const Game& g = *sp.game;
  double disc = g.discount_pow(o.stage);
  std::unordered_map<std::pair<HistId, HistId>, Entry, detail::PairHash> acc;
  OccupancyState out;
  out.stage = o.stage + 1;
  out.rhoL = o.rhoL;
  out.rhoF = o.rhoF;
  for (const auto& e : o.support) {
    const std::vector<double>& d = dL(e.hL);
    int aF = dF(e.hF);
    for (int aL = 0; aL < g.nAL(); ++aL) {
      if (d[aL] <= 0) continue;
      for (const auto& sc : g.succ(e.s, aL, aF)) {
        double q = e.p * d[aL] * sc.p;
        out.rhoL += disc * q * g.rL(e.s, aL, aF, sc.s2);
        out.rhoF += disc * q * g.rF(e.s, aL, aF, sc.s2);
        HistId nL = sp.extend_leader(e.hL, aL, sc.s2);
        HistId nF = sp.extend_follower(e.hF, aF, sc.s2);
        auto [it, fresh] = acc.try_emplace({nL, nF}, Entry{sc.s2, nL, nF, 0.0});
        it->second.p += q;
      }
    }
  }
  out.support.reserve(acc.size());
  for (auto& kv : acc) out.support.push_back(kv.second);
  detail::compact(out.support);
  return out;
}

inline OccupancyState tau_advance(const OccupancyState& o, const LeaderRule& dL, const FollowerRule& dF,
                                  HistorySpace& sp) {
  if (dL.stage != o.stage || dF.stage != o.stage) throw DomainError("tau_advance: stage mismatch");
  return tau_advance_fn(
      o, [&](HistId h) -> const std::vector<double>& { return dL.at(h); }, [&](HistId h) { return dF.at(h); }, sp);
}

inline double value_so_far(const OccupancyState& o, Player who) { return o.rho(who); }

inline std::vector<double> marginal_belief(const OccupancyState& o, int nS) {
  std::vector<double> b(nS, 0.0);
  for (const auto& e : o.support) b[e.s] += e.p;
  return b;
}

struct CondEntry {
  int s;
  HistId hL;
  double p;
};

// Occupancy state conditioned on one follower history. Support sorted by hL.
struct ConditionalOccupancy {
  HistId hF = -1;
  int stage = 0;
  double weight = 0;
  std::vector<CondEntry> support;
};

inline std::vector<ConditionalOccupancy> condition_on_follower(const OccupancyState& o) {
  std::map<HistId, ConditionalOccupancy> by;
  for (const auto& e : o.support) {
    auto& c = by[e.hF];
    c.hF = e.hF;
    c.stage = o.stage;
    c.weight += e.p;
    c.support.push_back({e.s, e.hL, e.p});
  }
  std::vector<ConditionalOccupancy> out;
  out.reserve(by.size());
  for (auto& [h, c] : by) {
    for (auto& e : c.support) e.p /= c.weight;
    std::sort(c.support.begin(), c.support.end(), [](const CondEntry& a, const CondEntry& b) { return a.hL < b.hL; });
    out.push_back(std::move(c));
  }
  return out;
}

// Inverse of condition_on_follower.
inline OccupancyState reassemble(const std::vector<ConditionalOccupancy>& parts, int stage, double rhoL, double rhoF) {
  OccupancyState o;
  o.stage = stage;
  o.rhoL = rhoL;
  o.rhoF = rhoF;
  for (const auto& c : parts)
    for (const auto& e : c.support) o.support.push_back({e.s, e.hL, c.hF, e.p * c.weight});
  std::sort(o.support.begin(), o.support.end(), entry_less);
  return o;
}

// One step of a conditional occupancy state under dL, follower action aF and
// observed next state s2. Returns the normalizer (0 when s2 is unreachable, in
// which case the returned conditional is empty).
template <class LeaderFn>
std::pair<double, ConditionalOccupancy> conditional_step_fn(const ConditionalOccupancy& oc, LeaderFn&& dL, int aF,
                                                           int s2, HistorySpace& sp) {
  const Game& g = *sp.game;
  std::map<HistId, double> acc;
  double eta = 0;
  for (const auto& e : oc.support) {
    const std::vector<double>& d = dL(e.hL);
    for (int aL = 0; aL < g.nAL(); ++aL) {
      if (d[aL] <= 0) continue;
      double q = g.p(e.s, aL, aF, s2);
      if (q <= 0) continue;
      acc[sp.extend_leader(e.hL, aL, s2)] += e.p * d[aL] * q;
      eta += e.p * d[aL] * q;
    }
  }
  ConditionalOccupancy out;
  out.stage = oc.stage + 1;
  if (eta <= 0) return {0.0, out};
  out.hF = oc.hF >= 0 ? sp.extend_follower(oc.hF, aF, s2) : -1;
  out.weight = oc.weight * eta;
  for (auto& [h, m] : acc)
    if (m / eta > kDropTol) out.support.push_back({s2, h, m / eta});
  return {eta, out};
}

inline std::pair<double, ConditionalOccupancy> conditional_step(const ConditionalOccupancy& oc, const LeaderRule& dL,
                                                               int aF, int s2, HistorySpace& sp) {
  return conditional_step_fn(oc, [&](HistId h) -> const std::vector<double>& { return dL.at(h); }, aF, s2, sp);
}

inline double l1_distance(const OccupancyState& a, const OccupancyState& b) {
  if (a.stage != b.stage) throw DomainError("l1_distance: stage mismatch");
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && entry_less(a.support[i], b.support[j]))) {
      d += a.support[i++].p;
    } else if (i == a.support.size() || entry_less(b.support[j], a.support[i])) {
      d += b.support[j++].p;
    } else {
      d += std::abs(a.support[i++].p - b.support[j++].p);
    }
  }
  return d;
}

inline double l1_distance(const ConditionalOccupancy& a, const ConditionalOccupancy& b) {
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && a.support[i].hL < b.support[j].hL)) {
      d += a.support[i++].p;
    } else if (i == a.support.size() || b.support[j].hL < a.support[i].hL) {
      d += b.support[j++].p;
    } else {
      d += std::abs(a.support[i++].p - b.support[j++].p);
    }
  }
  return d;
}

// Exact (vL, vF) of a joint policy by propagating occupancy states.
inline std::pair<double, double> evaluate_joint_policy(HistorySpace& sp, const LeaderPolicy& piL,
                                                       const FollowerPolicy& piF) {
  OccupancyState o = initial_occupancy(sp);
  for (int t = 0; t < sp.game->horizon; ++t) {
    o = tau_advance_fn(
        o, [&](HistId h) -> const std::vector<double>& { return piL.at(t, sp, h); },
        [&](HistId h) { return piF.at(t, sp, h); }, sp);
  }
  return {o.rhoL, o.rhoF};
}

// Recomputes rho from the support: with full histories every triple pins down
// its trajectory, so the accrued reward is a per-triple sum.
inline std::pair<double, double> recompute_rho(const OccupancyState& o, const HistorySpace& sp) {
  const Game& g = *sp.game;
  if (sp.L.markov() || sp.F.markov()) throw DomainError("recompute_rho needs full histories");
  double rl = 0, rf = 0;
  for (const auto& e : o.support) {
    auto tl = sp.L.trace(e.hL), tf = sp.F.trace(e.hF);
    for (int t = 0; t < o.stage; ++t) {
      int s = tl[2 * t], aL = tl[2 * t + 1], aF = tf[2 * t + 1], s2 = tl[2 * t + 2];
      rl += e.p * g.discount_pow(t) * g.rL(s, aL, aF, s2);
      rf += e.p * g.discount_pow(t) * g.rF(s, aL, aF, s2);
    }
  }
  return {rl, rf};
}

// Debug dump: "s|hL|hF" -> probability.
inline std::string dump_occupancy(const OccupancyState& o, const HistorySpace& sp) {
  std::ostringstream os;
  os << "{\"stage\": " << o.stage << ", \"rhoL\": " << o.rhoL << ", \"rhoF\": " << o.rhoF << ", \"support\": {";
  bool first = true;
  for (const auto& e : o.support) {
    os << (first ? "" : ", ") << '"' << sp.game->states[e.s] << '|' << sp.L.to_string(e.hL, *sp.game, Player::Leader)
       << '|' << sp.F.to_string(e.hF, *sp.game, Player::Follower) << "\": " << e.p;
    first = false;
  }
  os << "}}";
  return os.str();
}

}  // namespace sse
