#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

#include "sse/occupancy.hpp"

namespace sse {

inline constexpr double kGrid = 1e-9;

inline long long on_grid(double x) { return std::llround(x / kGrid); }

// Set of occupancy states reachable under one leader rule history and all
// follower rule histories. Members are kept in canonical order.
struct CredibleSet {
  int id = -1;
  int stage = 0;
  std::vector<OccupancyState> members;
  std::vector<int> rule_history;  // ids of the leader rules that produced it
};

// Total order on occupancy states used for set semantics and deterministic
// representative choice: support keys first, then masses, then rho.
inline bool occupancy_less(const OccupancyState& a, const OccupancyState& b) {
  std::size_t n = std::min(a.support.size(), b.support.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto &x = a.support[i], &y = b.support[i];
    if (x.hL != y.hL) return x.hL < y.hL;
    if (x.hF != y.hF) return x.hF < y.hF;
  }
  if (a.support.size() != b.support.size()) return a.support.size() < b.support.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_grid(a.support[i].p) != on_grid(b.support[i].p)) return a.support[i].p < b.support[i].p;
  if (on_grid(a.rhoL) != on_grid(b.rhoL)) return a.rhoL < b.rhoL;
  if (on_grid(a.rhoF) != on_grid(b.rhoF)) return a.rhoF < b.rhoF;
  return false;
}

inline bool occupancy_equal(const OccupancyState& a, const OccupancyState& b) {
  return a.stage == b.stage && !occupancy_less(a, b) && !occupancy_less(b, a);
}

inline void canonicalize(CredibleSet& c) {
  std::sort(c.members.begin(), c.members.end(), occupancy_less);
  c.members.erase(std::unique(c.members.begin(), c.members.end(), occupancy_equal), c.members.end());
}

inline CredibleSet initial_credible_set(HistorySpace& sp) {
  CredibleSet c;
  c.members.push_back(initial_occupancy(sp));
  return c;
}

// Follower histories present in o, in id order.
inline std::vector<HistId> follower_histories(const OccupancyState& o) {
  std::vector<HistId> h;
  for (const auto& e : o.support) h.push_back(e.hF);
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  return h;
}

inline std::vector<HistId> leader_histories(const CredibleSet& c) {
  std::vector<HistId> h;
  for (const auto& o : c.members)
    for (const auto& e : o.support) h.push_back(e.hL);
  std::sort(h.begin(), h.end());
  h.erase(std::unique(h.begin(), h.end()), h.end());
  return h;
}

// Number of distinct follower rules for member o (saturating).
inline double follower_rule_count(const OccupancyState& o, const HistorySpace& sp) {
  double n = 1;
  for (HistId h : follower_histories(o)) n *= double(sp.game->follower_choices(sp.F.state(h)).size());
  return n;
}

// Calls fn(rule) for every deterministic follower rule over o's histories.
template <class Fn>
void for_each_follower_rule(const OccupancyState& o, const HistorySpace& sp, Fn&& fn) {
  auto hs = follower_histories(o);
  std::vector<std::size_t> digit(hs.size(), 0);
  FollowerRule r;
  r.stage = o.stage;
  while (true) {
    for (std::size_t i = 0; i < hs.size(); ++i) r.act[hs[i]] = sp.game->follower_choices(sp.F.state(hs[i]))[digit[i]];
    fn(r);
    std::size_t i = 0;
    for (; i < hs.size(); ++i) {
      if (++digit[i] < sp.game->follower_choices(sp.F.state(hs[i])).size()) break;
      digit[i] = 0;
    }
    if (i == hs.size()) return;
  }
}

// T(c, dL): advance every member under every follower rule.
inline CredibleSet credible_transition(const CredibleSet& c, const LeaderRule& dL, HistorySpace& sp,
                                       double cap = double(1 << 20)) {
  double total = 0;
  for (const auto& o : c.members) total += follower_rule_count(o, sp);
  if (total > cap) {
    std::ostringstream os;
    os << "credible_transition would enumerate " << total << " follower rules (cap " << cap
       << "); use the sampled expand path";
    throw CapacityError(os.str());
  }
  CredibleSet out;
  out.stage = c.stage + 1;
  out.rule_history = c.rule_history;
  for (const auto& o : c.members)
    for_each_follower_rule(o, sp, [&](const FollowerRule& dF) { out.members.push_back(tau_advance(o, dL, dF, sp)); });
  canonicalize(out);
  return out;
}

// Filtering operator: within each marginal-belief class drop strictly
// Pareto-dominated members, then keep one member per value pair.
inline CredibleSet filter(const CredibleSet& c, int nS) {
  std::map<std::vector<long long>, std::vector<const OccupancyState*>> groups;
  for (const auto& o : c.members) {
    auto b = marginal_belief(o, nS);
    std::vector<long long> key(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) key[i] = on_grid(b[i]);
    groups[key].push_back(&o);
  }
  CredibleSet out;
  out.stage = c.stage;
  out.rule_history = c.rule_history;
  for (auto& [key, g] : groups) {
    // members arrive in canonical order, so the first of each value pair is
    // the lowest-id representative
    std::map<std::pair<long long, long long>, const OccupancyState*> kept;
    for (const OccupancyState* o : g) {
      long long l = on_grid(o->rhoL), f = on_grid(o->rhoF);
      bool dominated = false;
      for (const OccupancyState* q : g) {
        long long ql = on_grid(q->rhoL), qf = on_grid(q->rhoF);
        if (ql >= l && qf >= f && (ql > l || qf > f)) { dominated = true; break; }
      }
      if (!dominated) kept.try_emplace({l, f}, o);
    }
    for (auto& [v, o] : kept) out.members.push_back(*o);
  }
  canonicalize(out);
  return out;
}

// R(c): best leader value among members maximizing the follower value.
inline double terminal_reward(const CredibleSet& c) {
  double best_f = -std::numeric_limits<double>::infinity();
  for (const auto& o : c.members) best_f = std::max(best_f, o.rhoF);
  double best_l = -std::numeric_limits<double>::infinity();
  for (const auto& o : c.members)
    if (o.rhoF >= best_f - kGrid) best_l = std::max(best_l, o.rhoL);
  return best_l;
}

inline double hausdorff_distance(const CredibleSet& a, const CredibleSet& b) {
  if (a.stage != b.stage) throw DomainError("hausdorff_distance: stage mismatch");
  auto directed = [](const CredibleSet& x, const CredibleSet& y) {
    double sup = 0;
    for (const auto& o : x.members) {
      double inf = std::numeric_limits<double>::infinity();
      for (const auto& q : y.members) inf = std::min(inf, l1_distance(o, q));
      sup = std::max(sup, inf);
    }
    return sup;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline std::string dump_credible_set(const CredibleSet& c, int nS) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    const auto& o = c.members[i];
    auto b = marginal_belief(o, nS);
    os << (i ? ", " : "") << "{\"belief\": [";
    for (std::size_t k = 0; k < b.size(); ++k) os << (k ? ", " : "") << b[k];
    os << "], \"rho_L\": " << o.rhoL << ", \"rho_F\": " << o.rhoF << ", \"support\": " << o.support.size() << "}";
  }
  os << "]";
  return os.str();
}

}  // namespace sse
