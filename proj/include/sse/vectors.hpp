#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "sse/credible.hpp"

namespace sse {

inline constexpr double kTieTol = 1e-9;

// Paired leader/follower linear functionals over (state, leader history).
// Coefficients are dense and aligned with the owning VectorSet's domain.
struct AlphaPair {
  std::vector<double> L, F;
  // backpointers: conditional it was built for, the follower action chosen
  // there and the next-stage pair used after each successor state
  HistId hF = -1;
  int aF = -1;
  std::map<int, int> next;
};

// One Γ: all pairs share the domain (leader histories of the origin credible
// set) and the leader rule that produced them.
struct VectorSet {
  int id = -1;
  int stage = 0;
  int origin = -1;    // credible-set id it was built for
  int next_set = -1;  // Γ in the next stage the backpointers refer to
  std::vector<HistId> domain;
  LeaderRule rule;
  std::vector<AlphaPair> pairs;

  void set_domain(std::vector<HistId> d, const HistoryPool& pool) {
    domain = std::move(d);
    index_.clear();
    by_state_.clear();
    cache_.clear();
    for (std::size_t i = 0; i < domain.size(); ++i) {
      index_[domain[i]] = int(i);
      by_state_[pool.state(domain[i])].push_back(int(i));
    }
  }

  // Domain slot used for history h. Histories outside the domain borrow the
  // coefficients of the domain history at the same state that shares the
  // longest state suffix, then the longest action suffix, then lowest id.
  // Returns -1 when the state is absent (coefficient 0).
  int resolve(HistId h, const HistoryPool& pool) const {
    auto it = index_.find(h);
    if (it != index_.end()) return it->second;
    auto c = cache_.find(h);
    if (c != cache_.end()) return c->second;
    int best = -1;
    auto bs = by_state_.find(pool.state(h));
    if (bs != by_state_.end()) {
      std::pair<int, int> best_score{-1, -1};
      for (int i : bs->second) {
        auto sc = suffix_score(h, domain[i], pool);
        if (sc > best_score || (sc == best_score && domain[i] < domain[best])) {
          best_score = sc;
          best = i;
        }
      }
    }
    cache_.emplace(h, best);
    return best;
  }

  double coef(const AlphaPair& a, Player who, HistId h, const HistoryPool& pool) const {
    int i = resolve(h, pool);
    if (i < 0) return 0.0;
    return who == Player::Leader ? a.L[i] : a.F[i];
  }

 private:
  static std::pair<int, int> suffix_score(HistId a, HistId b, const HistoryPool& pool) {
    int ks = 0, ka = 0;
    bool states_match = true, acts_match = true;
    while (a >= 0 && b >= 0 && (states_match || acts_match)) {
      if (states_match && pool.state(a) == pool.state(b)) ++ks; else states_match = false;
      HistId pa = pool.parent(a), pb = pool.parent(b);
      if (pa < 0 || pb < 0) break;
      if (acts_match && pool.action(a) == pool.action(b)) ++ka; else acts_match = false;
      a = pa;
      b = pb;
    }
    return {ks, ka};
  }

  std::unordered_map<HistId, int> index_;
  std::map<int, std::vector<int>> by_state_;
  mutable std::unordered_map<HistId, int> cache_;
};

// Owns every Γ ever built so backpointers survive pruning; Λ_t lists the
// active ids per stage.
struct VectorStore {
  std::vector<std::unique_ptr<VectorSet>> sets;
  std::vector<std::vector<int>> lambda;

  VectorSet& make(int stage) {
    sets.push_back(std::make_unique<VectorSet>());
    sets.back()->id = int(sets.size()) - 1;
    sets.back()->stage = stage;
    return *sets.back();
  }
  VectorSet& at(int id) { return *sets.at(id); }
  const VectorSet& at(int id) const { return *sets.at(id); }
};

// Zero Γ for the terminal stage.
inline void make_zero_set(VectorSet& z) {
  z.pairs.assign(1, AlphaPair{});
}

inline double evaluate_pair(const VectorSet& G, const AlphaPair& a, Player who, const ConditionalOccupancy& x,
                            const HistoryPool& pool) {
  double v = 0;
  for (const auto& e : x.support) v += e.p * G.coef(a, who, e.hL, pool);
  return v;
}

// Pairs maximizing the follower functional at x (ties within kTieTol).
inline std::vector<int> filtered_argmax(const VectorSet& G, const ConditionalOccupancy& x, const HistoryPool& pool) {
  if (G.pairs.empty()) throw DomainError("filtered_argmax: empty vector set");
  std::vector<double> vf(G.pairs.size());
  double best = -kInf;
  for (std::size_t i = 0; i < G.pairs.size(); ++i) best = std::max(best, vf[i] = evaluate_pair(G, G.pairs[i], Player::Follower, x, pool));
  std::vector<int> out;
  for (std::size_t i = 0; i < G.pairs.size(); ++i)
    if (vf[i] >= best - kTieTol) out.push_back(int(i));
  return out;
}

// Leader-favourable pair among the follower maximizers.
inline int select_pair(const VectorSet& G, const ConditionalOccupancy& x, const HistoryPool& pool) {
  int best = -1;
  double bl = -kInf;
  for (int i : filtered_argmax(G, x, pool)) {
    double l = evaluate_pair(G, G.pairs[i], Player::Leader, x, pool);
    if (l > bl + kTieTol) {
      bl = l;
      best = i;
    }
  }
  return best;
}

inline double evaluate_vectorset(const VectorSet& G, const OccupancyState& o, Player who, const HistorySpace& sp) {
  if (G.pairs.empty()) throw DomainError("evaluate_vectorset: empty vector set");
  if (G.stage != o.stage) throw DomainError("evaluate_vectorset: stage mismatch");
  double v = 0;
  for (const auto& x : condition_on_follower(o)) {
    double inner = -kInf;
    for (int i : filtered_argmax(G, x, sp.L)) inner = std::max(inner, evaluate_pair(G, G.pairs[i], who, x, sp.L));
    v += x.weight * inner;
  }
  return o.rho(who) + sp.game->discount_pow(o.stage) * v;
}

struct SetValue {
  double value = -kInf;
  int set = -1;     // Γ id
  int member = -1;  // follower-preferred member
};

// v^Γ_L(c): best leader value among members maximizing v^Γ_F.
inline SetValue vectorset_value(const VectorSet& G, const CredibleSet& c, const HistorySpace& sp) {
  std::vector<double> vf(c.members.size()), vl(c.members.size());
  double best_f = -kInf;
  for (std::size_t k = 0; k < c.members.size(); ++k) {
    vf[k] = evaluate_vectorset(G, c.members[k], Player::Follower, sp);
    vl[k] = evaluate_vectorset(G, c.members[k], Player::Leader, sp);
    best_f = std::max(best_f, vf[k]);
  }
  SetValue r;
  r.set = G.id;
  for (std::size_t k = 0; k < c.members.size(); ++k)
    if (vf[k] >= best_f - kTieTol && vl[k] > r.value + kTieTol) {
      r.value = vl[k];
      r.member = int(k);
    }
  return r;
}

inline SetValue leader_value(const VectorStore& store, const std::vector<int>& lambda, const CredibleSet& c,
                             const HistorySpace& sp) {
  if (lambda.empty()) throw DomainError("leader_value: empty collection");
  SetValue best;
  for (int id : lambda) {
    const VectorSet& G = store.at(id);
    if (G.stage != c.stage) throw DomainError("leader_value: stage mismatch");
    SetValue v = vectorset_value(G, c, sp);
    if (v.value > best.value + kTieTol) best = v;
  }
  return best;
}

// Value of c by nearest stored sample (min value over the d_H tie set).
inline double nearest_neighbour_value(const std::map<int, double>& values, const std::map<int, CredibleSet>& samples,
                                      const CredibleSet& c) {
  if (samples.empty()) throw DomainError("nearest_neighbour_value: no samples");
  double dmin = kInf;
  std::vector<std::pair<double, int>> d;
  for (const auto& [id, s] : samples) {
    d.emplace_back(hausdorff_distance(c, s), id);
    dmin = std::min(dmin, d.back().first);
  }
  double v = kInf;
  for (auto& [dist, id] : d)
    if (dist <= dmin + kTieTol) v = std::min(v, values.at(id));
  return v;
}

// Deduplicated conditionals of a credible set. Conditionals on the same
// follower history coincide across members that share a leader rule history;
// equal supports are merged, anything else is kept separate.
struct CondIndex {
  std::vector<ConditionalOccupancy> conds;               // weight field unused
  std::vector<std::vector<std::pair<int, double>>> of;  // per member: (cond, Pr(hF|o))
};

inline bool same_support(const ConditionalOccupancy& a, const ConditionalOccupancy& b) {
  if (a.support.size() != b.support.size()) return false;
  for (std::size_t i = 0; i < a.support.size(); ++i)
    if (a.support[i].hL != b.support[i].hL || std::abs(a.support[i].p - b.support[i].p) > kTieTol) return false;
  return true;
}

inline CondIndex index_conditionals(const CredibleSet& c) {
  CondIndex ix;
  std::map<HistId, std::vector<int>> by_h;
  for (const auto& o : c.members) {
    ix.of.emplace_back();
    for (auto& x : condition_on_follower(o)) {
      int id = -1;
      for (int k : by_h[x.hF])
        if (same_support(ix.conds[k], x)) { id = k; break; }
      if (id < 0) {
        id = int(ix.conds.size());
        by_h[x.hF].push_back(id);
        ix.conds.push_back(x);
        ix.conds.back().weight = 1.0;
      }
      ix.of.back().emplace_back(id, x.weight);
    }
  }
  return ix;
}

// Unnormalized successor mass of (s, hL) entries of x under rule d, follower
// action aF and next state s2, keyed by the next Γ's domain slot. Slot -1
// collects mass on histories with no coefficient.
template <class RuleFn>
std::map<int, double> successor_mass(const std::vector<CondEntry>& x, RuleFn&& d, int aF, int s2, HistorySpace& sp,
                                     const VectorSet& next) {
  const Game& g = *sp.game;
  std::map<int, double> mu;
  for (const auto& e : x) {
    const std::vector<double>& dist = d(e.hL);
    for (int aL = 0; aL < g.nAL(); ++aL) {
      if (dist[aL] <= 0) continue;
      double q = g.p(e.s, aL, aF, s2);
      if (q <= 0) continue;
      mu[next.resolve(sp.extend_leader(e.hL, aL, s2), sp.L)] += e.p * dist[aL] * q;
    }
  }
  return mu;
}

inline double dot(const std::map<int, double>& mu, const std::vector<double>& a) {
  double v = 0;
  for (auto& [i, m] : mu)
    if (i >= 0) v += m * a[i];
  return v;
}

// Lexicographic (follower, then leader) best pair for a successor mass.
inline int best_pair_for(const VectorSet& next, const std::map<int, double>& mu) {
  int best = 0;
  double bf = -kInf, bl = -kInf;
  for (std::size_t i = 0; i < next.pairs.size(); ++i) {
    const auto& a = next.pairs[i];
    double f = a.F.empty() ? 0 : dot(mu, a.F), l = a.L.empty() ? 0 : dot(mu, a.L);
    if (f > bf + kTieTol || (f >= bf - kTieTol && l > bl + kTieTol)) {
      bf = f;
      bl = l;
      best = int(i);
    }
  }
  return best;
}

// Selections that accompany a leader rule: follower action per conditional and
// next pair per (conditional, successor state).
struct Selection {
  std::vector<int> kappa;                // per conditional in the index
  std::vector<std::map<int, int>> w;     // per conditional: s' -> pair
};

// Materializes Γ for credible set c from (δ, κ, w): one pair per conditional,
// defined over every leader history of c.
inline void build_vector_set(VectorSet& out, const CredibleSet& c, const CondIndex& ix, const LeaderRule& dL,
                             const Selection& sel, const VectorSet& next, HistorySpace& sp) {
  const Game& g = *sp.game;
  if (sel.kappa.size() != ix.conds.size() || sel.w.size() != ix.conds.size())
    throw DomainError("build_vector_set: selection does not match conditionals");
  out.next_set = next.id;
  out.rule = dL;
  out.set_domain(leader_histories(c), sp.L);
  std::vector<int> dom_state(out.domain.size());
  for (std::size_t i = 0; i < out.domain.size(); ++i) dom_state[i] = sp.L.state(out.domain[i]);
  auto rule = [&](HistId h) -> const std::vector<double>& { return dL.at(h); };
  out.pairs.clear();
  for (std::size_t k = 0; k < ix.conds.size(); ++k) {
    const auto& x = ix.conds[k];
    int aF = sel.kappa[k];
    if (aF < 0 || aF >= g.nAF()) throw DomainError("build_vector_set: kappa is not one-hot");
    AlphaPair a;
    a.hF = x.hF;
    a.aF = aF;
    a.L.assign(out.domain.size(), 0.0);
    a.F.assign(out.domain.size(), 0.0);
    // successor states reachable from any domain history; w fills the ones
    // x reaches, the rest take the lexicographic best on the pooled mass
    std::map<int, std::vector<CondEntry>> pooled;
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
      const auto& d = dL.at(out.domain[i]);
      for (int aL = 0; aL < g.nAL(); ++aL)
        if (d[aL] > 0)
          for (const auto& sc : g.succ(dom_state[i], aL, aF)) pooled[sc.s2];
    }
    for (auto& [s2, v] : pooled) {
      auto it = sel.w[k].find(s2);
      if (it != sel.w[k].end()) {
        a.next[s2] = it->second;
      } else {
        std::vector<CondEntry> all;
        for (std::size_t i = 0; i < out.domain.size(); ++i) all.push_back({dom_state[i], out.domain[i], 1.0});
        a.next[s2] = best_pair_for(next, successor_mass(all, rule, aF, s2, sp, next));
      }
    }
    for (std::size_t i = 0; i < out.domain.size(); ++i) {
      int s = dom_state[i];
      HistId h = out.domain[i];
      const auto& d = dL.at(h);
      double vl = 0, vf = 0;
      for (int aL = 0; aL < g.nAL(); ++aL) {
        if (d[aL] <= 0) continue;
        for (const auto& sc : g.succ(s, aL, aF)) {
          const AlphaPair& nx = next.pairs.at(a.next.at(sc.s2));
          HistId h2 = sp.extend_leader(h, aL, sc.s2);
          double cl = nx.L.empty() ? 0 : next.coef(nx, Player::Leader, h2, sp.L);
          double cf = nx.F.empty() ? 0 : next.coef(nx, Player::Follower, h2, sp.L);
          vl += d[aL] * sc.p * (g.rL(s, aL, aF, sc.s2) + g.gamma * cl);
          vf += d[aL] * sc.p * (g.rF(s, aL, aF, sc.s2) + g.gamma * cf);
        }
      }
      a.L[i] = vl;
      a.F[i] = vf;
    }
    out.pairs.push_back(std::move(a));
  }
}

// Number of distinct coefficient pairs across the given sets.
inline std::size_t vf_size(const VectorStore& store, const std::vector<int>& ids) {
  std::vector<std::vector<long long>> seen;
  for (int id : ids) {
    const VectorSet& G = store.at(id);
    for (const auto& a : G.pairs) {
      std::vector<long long> key{G.id >= 0 ? G.stage : 0};
      for (std::size_t i = 0; i < G.domain.size(); ++i) {
        key.push_back(G.domain[i]);
        key.push_back(a.L.empty() ? 0 : on_grid(a.L[i]));
        key.push_back(a.F.empty() ? 0 : on_grid(a.F[i]));
      }
      seen.push_back(std::move(key));
    }
  }
  std::sort(seen.begin(), seen.end());
  return std::size_t(std::unique(seen.begin(), seen.end()) - seen.begin());
}

// Structured dump of a Γ for policy audit.
inline std::string dump_vector_set(const VectorSet& G, const HistorySpace& sp) {
  std::ostringstream os;
  os << "{\"id\": " << G.id << ", \"stage\": " << G.stage << ", \"origin\": " << G.origin << ", \"next\": " << G.next_set
     << ", \"pairs\": [";
  for (std::size_t k = 0; k < G.pairs.size(); ++k) {
    const auto& a = G.pairs[k];
    os << (k ? ", " : "") << "{\"hF\": " << a.hF << ", \"aF\": " << a.aF << ", \"coef\": {";
    for (std::size_t i = 0; i < G.domain.size(); ++i)
      os << (i ? ", " : "") << '"' << sp.L.to_string(G.domain[i], *sp.game, Player::Leader) << "\": [" << a.L[i] << ", "
         << a.F[i] << "]";
    os << "}, \"next\": {";
    bool first = true;
    for (auto& [s2, p] : a.next) {
      os << (first ? "" : ", ") << '"' << sp.game->states[s2] << "\": " << p;
      first = false;
    }
    os << "}}";
  }
  os << "]}";
  return os.str();
}

}  // namespace sse
