#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sse/backup.hpp"
#include "sse/milp.hpp"
#include "sse/occupancy.hpp"

namespace sse {

inline constexpr double kEnumCap = double(1 << 20);

// ---------------------------------------------------------------------------
// Follower best response

struct BestResponse {
  double vF = 0, vL = 0;
  FollowerPolicy policy;
};

namespace detail {

struct BrNode {
  int s;
  HistId hL;
  double p;
};

// Returns mass-weighted (F, L) values of the subtree rooted at follower
// history hF holding the given joint mass.
inline std::pair<double, double> br_rec(HistorySpace& sp, const LeaderPolicy& piL, int t, HistId hF,
                                        std::vector<BrNode>& nodes, BestResponse& out, double tol) {
  const Game& g = *sp.game;
  if (t == g.horizon || nodes.empty()) return {0, 0};
  const int s = sp.F.state(hF);
  const double disc = g.discount_pow(t);
  double bestF = -kInf, bestL = -kInf;
  int bestA = -1;
  for (int aF : g.follower_choices(s)) {
    double vF = 0, vL = 0;
    std::map<int, std::map<HistId, double>> next;
    for (const auto& n : nodes) {
      const auto& d = piL.at(t, sp, n.hL);
      for (int aL = 0; aL < g.nAL(); ++aL) {
        if (d[aL] <= 0) continue;
        for (const auto& sc : g.succ(n.s, aL, aF)) {
          double m = n.p * d[aL] * sc.p;
          vF += m * disc * g.rF(n.s, aL, aF, sc.s2);
          vL += m * disc * g.rL(n.s, aL, aF, sc.s2);
          next[sc.s2][sp.extend_leader(n.hL, aL, sc.s2)] += m;
        }
      }
    }
    for (auto& [s2, hs] : next) {
      std::vector<BrNode> child;
      for (auto& [h, p] : hs)
        if (p > kDropTol) child.push_back({s2, h, p});
      auto [cf, cl] = br_rec(sp, piL, t + 1, sp.extend_follower(hF, aF, s2), child, out, tol);
      vF += cf;
      vL += cl;
    }
    if (bestA < 0 || vF > bestF + tol || (vF >= bestF - tol && vL > bestL + tol)) {
      bestF = vF;
      bestL = vL;
      bestA = aF;
    }
  }
  out.policy.rules[t].act[hF] = bestA;
  // subtrees of unchosen actions may have written entries; the chosen one is
  // recomputed last so its entries win
  if (bestA != g.follower_choices(s).back()) {
    std::map<int, std::map<HistId, double>> next;
    for (const auto& n : nodes) {
      const auto& d = piL.at(t, sp, n.hL);
      for (int aL = 0; aL < g.nAL(); ++aL)
        if (d[aL] > 0)
          for (const auto& sc : g.succ(n.s, aL, bestA)) next[sc.s2][sp.extend_leader(n.hL, aL, sc.s2)] += n.p * d[aL] * sc.p;
    }
    for (auto& [s2, hs] : next) {
      std::vector<BrNode> child;
      for (auto& [h, p] : hs)
        if (p > kDropTol) child.push_back({s2, h, p});
      br_rec(sp, piL, t + 1, sp.extend_follower(hF, bestA, s2), child, out, tol);
    }
  }
  return {bestF, bestL};
}

}  // namespace detail

// Exact follower best response to piL with leader-favourable tie-breaking.
// Follower histories partition the tree, so the lexicographic (F, then L)
// choice can be made history by history.
inline BestResponse follower_best_response(HistorySpace& sp, const LeaderPolicy& piL, double tol = 1e-9) {
  const Game& g = *sp.game;
  BestResponse out;
  out.policy.rules.resize(g.horizon);
  for (int t = 0; t < g.horizon; ++t) out.policy.rules[t].stage = t;
  int s0 = g.initial_state;
  std::vector<detail::BrNode> root{{s0, sp.L.root(s0), 1.0}};
  auto [f, l] = detail::br_rec(sp, piL, 0, sp.F.root(s0), root, out, tol);
  out.vF = f;
  out.vL = l;
  return out;
}

// Signed gap between a claimed leader value and the value piL actually
// secures against a best-responding follower.
inline double measured_exploitability(HistorySpace& sp, const LeaderPolicy& piL, double claimed) {
  return claimed - follower_best_response(sp, piL).vL;
}

// ---------------------------------------------------------------------------
// Deterministic policies

// log2 of |A|^{Σ_{t<ℓ} |A×S|^t}, the number of deterministic history-dependent
// policies of one player.
inline double policy_count_log2(const Game& g, Player who, int horizon) {
  double a = who == Player::Leader ? g.nAL() : g.nAF();
  double e = 0, term = 1;
  for (int t = 0; t < horizon; ++t) {
    e += term;
    term *= a * g.nS();
    if (e > 1e300) return kInf;
  }
  return a <= 1 ? 0.0 : e * std::log2(a);
}

// "a^e" in the closed form, e.g. "2^73".
inline std::string policy_count_string(const Game& g, Player who, int horizon) {
  long long a = who == Player::Leader ? g.nAL() : g.nAF();
  long double e = 0, term = 1;
  for (int t = 0; t < horizon; ++t) {
    e += term;
    term *= (long double)(a) * g.nS();
  }
  std::ostringstream os;
  os << a << '^' << std::fixed;
  os.precision(0);
  os << e;
  return os.str();
}

inline bool fits_cap(const Game& g, int horizon, double cap = kEnumCap) {
  double c = std::log2(cap);
  return policy_count_log2(g, Player::Leader, horizon) <= c + 1e-9 &&
         policy_count_log2(g, Player::Follower, horizon) <= c + 1e-9;
}

// Every deterministic history-dependent policy of `who`, as one action id per
// history in the order of `histories` (all sequences s0 a0 s1 ... with raw
// action ids). Calls fn(histories, actions); returns the count.
inline double for_each_deterministic_policy(
    const Game& g, Player who, int horizon,
    const std::function<void(const std::vector<std::vector<int>>&, const std::vector<int>&)>& fn,
    double cap = kEnumCap) {
  if (policy_count_log2(g, who, horizon) > std::log2(cap) + 1e-9)
    throw CapacityError("deterministic policy count " + policy_count_string(g, who, horizon) + " exceeds the cap");
  const int nA = who == Player::Leader ? g.nAL() : g.nAF();
  std::vector<std::vector<int>> hs{{g.initial_state}}, frontier{{g.initial_state}};
  for (int t = 1; t < horizon; ++t) {
    std::vector<std::vector<int>> nx;
    for (const auto& h : frontier)
      for (int a = 0; a < nA; ++a)
        for (int s = 0; s < g.nS(); ++s) {
          auto h2 = h;
          h2.push_back(a);
          h2.push_back(s);
          nx.push_back(std::move(h2));
        }
    hs.insert(hs.end(), nx.begin(), nx.end());
    frontier.swap(nx);
  }
  std::vector<int> act(hs.size(), 0);
  double n = 0;
  while (true) {
    fn(hs, act);
    ++n;
    std::size_t i = 0;
    for (; i < act.size(); ++i) {
      if (++act[i] < nA) break;
      act[i] = 0;
    }
    if (i == act.size()) return n;
  }
}

// Behaviourally distinct deterministic policies: actions are assigned only at
// histories the policy itself can reach, and only among canonical choices.
// Policies that differ elsewhere have identical payoffs against every
// opponent, so this is the payoff quotient of the full enumeration.
using DetPolicy = std::vector<std::map<HistId, int>>;  // per stage

inline std::vector<DetPolicy> effective_policies(HistorySpace& sp, Player who, std::size_t cap = 1 << 20) {
  const Game& g = *sp.game;
  std::vector<DetPolicy> out;
  DetPolicy cur(g.horizon);
  std::function<void(int, std::vector<HistId>)> rec = [&](int t, std::vector<HistId> hs) {
    if (t == g.horizon) {
      if (out.size() >= cap) throw CapacityError("effective policy enumeration exceeds the cap");
      out.push_back(cur);
      return;
    }
    std::vector<std::size_t> digit(hs.size(), 0);
    auto choices = [&](HistId h) -> const std::vector<int>& {
      return who == Player::Leader ? g.leader_choices(sp.L.state(h)) : g.follower_choices(sp.F.state(h));
    };
    while (true) {
      cur[t].clear();
      std::vector<HistId> nx;
      for (std::size_t i = 0; i < hs.size(); ++i) {
        int a = choices(hs[i])[digit[i]];
        cur[t][hs[i]] = a;
        int s = who == Player::Leader ? sp.L.state(hs[i]) : sp.F.state(hs[i]);
        std::vector<int> succ;
        int nOpp = who == Player::Leader ? g.nAF() : g.nAL();
        for (int b = 0; b < nOpp; ++b)
          for (const auto& sc : who == Player::Leader ? g.succ(s, a, b) : g.succ(s, b, a)) succ.push_back(sc.s2);
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        for (int s2 : succ)
          nx.push_back(who == Player::Leader ? sp.extend_leader(hs[i], a, s2) : sp.extend_follower(hs[i], a, s2));
      }
      rec(t + 1, nx);
      std::size_t i = 0;
      for (; i < hs.size(); ++i) {
        if (++digit[i] < choices(hs[i]).size()) break;
        digit[i] = 0;
      }
      if (i == hs.size()) break;
    }
    cur[t].clear();
  };
  int s0 = g.initial_state;
  rec(0, {who == Player::Leader ? sp.L.root(s0) : sp.F.root(s0)});
  return out;
}

inline LeaderPolicy to_leader_policy(const DetPolicy& d, const Game& g) {
  LeaderPolicy p;
  p.rules.resize(d.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    p.rules[t].stage = int(t);
    for (auto [h, a] : d[t]) {
      std::vector<double> row(g.nAL(), 0.0);
      row[a] = 1.0;
      p.rules[t].dist[h] = std::move(row);
    }
  }
  return p;
}

inline FollowerPolicy to_follower_policy(const DetPolicy& d) {
  FollowerPolicy p;
  p.rules.resize(d.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    p.rules[t].stage = int(t);
    p.rules[t].act.insert(d[t].begin(), d[t].end());
  }
  return p;
}

// Brute-force best response over every behaviourally distinct follower
// policy: the argmax set (1e-9 ties) and the SSE tie-break leader value.
struct EnumBestResponse {
  double vF = -kInf, vL = -kInf;
  std::vector<std::size_t> argmax;
  std::vector<double> leader_values;  // per argmax member
};

inline EnumBestResponse follower_best_response_enum(HistorySpace& sp, const LeaderPolicy& piL) {
  auto fs = effective_policies(sp, Player::Follower);
  std::vector<std::pair<double, double>> v(fs.size());
  EnumBestResponse out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    v[i] = evaluate_joint_policy(sp, piL, to_follower_policy(fs[i]));
    out.vF = std::max(out.vF, v[i].second);
  }
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (v[i].second >= out.vF - 1e-9) {
      out.argmax.push_back(i);
      out.leader_values.push_back(v[i].first);
      out.vL = std::max(out.vL, v[i].first);
    }
  return out;
}

// Behaviour strategy equivalent to a mixture of deterministic leader policies
// (the leader has perfect recall).
inline LeaderPolicy mixture_to_behaviour(const std::vector<std::pair<double, DetPolicy>>& mix, const Game& g) {
  LeaderPolicy p;
  int T = g.horizon;
  p.rules.resize(T);
  std::vector<std::map<HistId, std::vector<double>>> acc(T);
  for (const auto& [w, d] : mix) {
    if (w <= 0) continue;
    for (int t = 0; t < T; ++t)
      for (auto [h, a] : d[t]) {
        auto& row = acc[t][h];
        if (row.empty()) row.assign(g.nAL(), 0.0);
        row[a] += w;
      }
  }
  for (int t = 0; t < T; ++t) {
    p.rules[t].stage = t;
    for (auto& [h, row] : acc[t]) {
      double s = 0;
      for (double x : row) s += x;
      for (double& x : row) x /= s;
      p.rules[t].dist[h] = row;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Backward induction (full and myopic)

enum class BiMode { Full, Myopic };

struct BaselineResult {
  LeaderPolicy leader;
  double value = 0;          // against the exact follower best response
  double planned_value = 0;  // what the method itself believes
};

inline BaselineResult backward_induction(const Game& g, BiMode mode, HistorySpace& sp) {
  const int T = g.horizon;
  std::vector<double> VL(g.nS(), 0.0), VF(g.nS(), 0.0);
  LeaderPolicy pol;
  pol.markov = true;
  pol.rules.resize(T);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> nL(g.nS()), nF(g.nS());
    pol.rules[t].stage = t;
    const double disc = g.discount_pow(t);
    for (int s = 0; s < g.nS(); ++s) {
      const auto& lch = g.leader_choices(s);
      const auto& fch = g.follower_choices(s);
      auto q = [&](int a, int b, bool leader, bool immediate) {
        double v = 0;
        for (const auto& sc : g.succ(s, a, b)) {
          double r = leader ? g.rL(s, a, b, sc.s2) : g.rF(s, a, b, sc.s2);
          v += sc.p * (disc * r + (immediate ? 0.0 : (leader ? VL[sc.s2] : VF[sc.s2])));
        }
        return v;
      };
      double best = -kInf;
      std::vector<double> bestRow;
      int bestB = -1;
      for (int b : fch) {
        MilpModel m;
        std::vector<int> x(lch.size());
        LinExpr one, obj;
        for (std::size_t i = 0; i < lch.size(); ++i) {
          x[i] = m.add_var(0, 1);
          one.add(x[i], 1.0);
          obj.add(x[i], q(lch[i], b, true, false));
        }
        m.add_row(one, Sense::EQ, 1.0);
        bool myo = mode == BiMode::Myopic;
        for (int b2 : fch) {
          if (b2 == b) continue;
          LinExpr r;
          for (std::size_t i = 0; i < lch.size(); ++i) r.add(x[i], q(lch[i], b, false, myo) - q(lch[i], b2, false, myo));
          m.add_row(r, Sense::GE, 0.0);
        }
        m.set_objective(obj, true);
        MilpResult res = m.solve();
        if (res.status != MilpStatus::Optimal) continue;
        if (res.objective > best + 1e-9) {
          best = res.objective;
          bestB = b;
          bestRow.assign(g.nAL(), 0.0);
          for (std::size_t i = 0; i < lch.size(); ++i) bestRow[lch[i]] = res.x[x[i]];
          detail::snap_row(bestRow);
        }
      }
      if (bestB < 0) throw DomainError("backward_induction: no follower action is inducible");
      pol.rules[t].dist[s] = bestRow;
      double l = 0, f = 0;
      for (int a : lch) {
        l += bestRow[a] * q(a, bestB, true, false);
        f += bestRow[a] * q(a, bestB, false, false);
      }
      nL[s] = l;
      nF[s] = f;
    }
    VL.swap(nL);
    VF.swap(nF);
  }
  BaselineResult r;
  r.leader = pol;
  r.planned_value = VL[g.initial_state];
  r.value = follower_best_response(sp, pol).vL;
  return r;
}

// ---------------------------------------------------------------------------
// Normal-form baselines

struct NormalForm {
  std::vector<DetPolicy> leader, follower;          // deduplicated
  std::vector<std::vector<double>> UL, UF;          // [leader][follower]
  std::string leader_count, follower_count;         // closed-form counts
};

// Payoff matrices over behaviourally distinct policies, with payoff-identical
// rows and columns merged. Refuses when the closed-form count exceeds cap.
inline NormalForm build_normal_form(HistorySpace& sp, double cap = kEnumCap) {
  const Game& g = *sp.game;
  NormalForm nf;
  nf.leader_count = policy_count_string(g, Player::Leader, g.horizon);
  nf.follower_count = policy_count_string(g, Player::Follower, g.horizon);
  if (!fits_cap(g, g.horizon, cap))
    throw CapacityError("normal form needs " + nf.leader_count + " x " + nf.follower_count +
                        " deterministic policies, above the enumeration cap");
  auto L = effective_policies(sp, Player::Leader);
  auto F = effective_policies(sp, Player::Follower);
  std::vector<LeaderPolicy> lp;
  std::vector<FollowerPolicy> fp;
  for (auto& d : L) lp.push_back(to_leader_policy(d, g));
  for (auto& d : F) fp.push_back(to_follower_policy(d));
  std::vector<std::vector<double>> UL(L.size(), std::vector<double>(F.size())), UF = UL;
  for (std::size_t i = 0; i < L.size(); ++i)
    for (std::size_t j = 0; j < F.size(); ++j) std::tie(UL[i][j], UF[i][j]) = evaluate_joint_policy(sp, lp[i], fp[j]);

  auto key = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<long long> k;
    for (double x : a) k.push_back(std::llround(x * 1e9));
    for (double x : b) k.push_back(std::llround(x * 1e9));
    return k;
  };
  std::map<std::vector<long long>, std::size_t> seenF;
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < F.size(); ++j) {
    std::vector<double> a(L.size()), b(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) a[i] = UL[i][j], b[i] = UF[i][j];
    if (seenF.try_emplace(key(a, b), j).second) cols.push_back(j);
  }
  std::map<std::vector<long long>, std::size_t> seenL;
  for (std::size_t i = 0; i < L.size(); ++i) {
    std::vector<double> a, b;
    for (std::size_t j : cols) a.push_back(UL[i][j]), b.push_back(UF[i][j]);
    if (!seenL.try_emplace(key(a, b), i).second) continue;
    nf.leader.push_back(L[i]);
    nf.UL.push_back(a);
    nf.UF.push_back(b);
  }
  for (std::size_t j : cols) nf.follower.push_back(F[j]);
  return nf;
}

struct NfResult {
  double value = -kInf;
  std::vector<std::pair<double, DetPolicy>> mixture;  // leader mixture
  DetPolicy follower;
  LeaderPolicy behaviour;                             // equivalent behaviour strategy
  std::size_t leader_policies = 0, follower_policies = 0;
};

// One LP per follower policy: best leader mixture that keeps it a best response.
inline NfResult nf_lp_sse(HistorySpace& sp, double cap = kEnumCap) {
  NormalForm nf = build_normal_form(sp, cap);
  const std::size_t nL = nf.leader.size(), nF = nf.follower.size();
  NfResult out;
  out.leader_policies = nL;
  out.follower_policies = nF;
  std::vector<double> bestx;
  std::size_t bestf = 0;
  for (std::size_t f = 0; f < nF; ++f) {
    MilpModel m;
    std::vector<int> x(nL);
    LinExpr one, obj;
    for (std::size_t i = 0; i < nL; ++i) {
      x[i] = m.add_var(0, 1);
      one.add(x[i], 1.0);
      obj.add(x[i], nf.UL[i][f]);
    }
    m.add_row(one, Sense::EQ, 1.0);
    for (std::size_t f2 = 0; f2 < nF; ++f2) {
      if (f2 == f) continue;
      LinExpr r;
      for (std::size_t i = 0; i < nL; ++i) r.add(x[i], nf.UF[i][f] - nf.UF[i][f2]);
      m.add_row(r, Sense::GE, 0.0);
    }
    m.set_objective(obj, true);
    MilpResult res = m.solve();
    if (res.status != MilpStatus::Optimal) continue;
    if (res.objective > out.value + 1e-9) {
      out.value = res.objective;
      bestf = f;
      bestx.assign(nL, 0.0);
      for (std::size_t i = 0; i < nL; ++i) bestx[i] = res.x[x[i]];
    }
  }
  detail::snap_row(bestx);
  for (std::size_t i = 0; i < nL; ++i)
    if (bestx[i] > 0) out.mixture.emplace_back(bestx[i], nf.leader[i]);
  out.follower = nf.follower[bestf];
  out.behaviour = mixture_to_behaviour(out.mixture, *sp.game);
  return out;
}

// Single MILP over joint distributions of policy pairs with a binary
// follower policy choice.
inline NfResult nf_milp_sse(HistorySpace& sp, double cap = kEnumCap) {
  NormalForm nf = build_normal_form(sp, cap);
  const std::size_t nL = nf.leader.size(), nF = nf.follower.size();
  NfResult out;
  out.leader_policies = nL;
  out.follower_policies = nF;
  MilpModel m;
  std::vector<std::vector<int>> pi(nL, std::vector<int>(nF));
  std::vector<int> z(nF), xL(nL);
  LinExpr total, obj, zsum, ownF;
  for (std::size_t i = 0; i < nL; ++i) xL[i] = m.add_var(0, 1);
  for (std::size_t f = 0; f < nF; ++f) z[f] = m.add_var(0, 1, true);
  for (std::size_t i = 0; i < nL; ++i)
    for (std::size_t f = 0; f < nF; ++f) {
      pi[i][f] = m.add_var(0, 1);
      total.add(pi[i][f], 1.0);
      obj.add(pi[i][f], nf.UL[i][f]);
      ownF.add(pi[i][f], nf.UF[i][f]);
    }
  m.add_row(total, Sense::EQ, 1.0);
  for (std::size_t i = 0; i < nL; ++i) {
    LinExpr r;
    for (std::size_t f = 0; f < nF; ++f) r.add(pi[i][f], 1.0);
    r.add(xL[i], -1.0);
    m.add_row(r, Sense::EQ, 0.0);
  }
  for (std::size_t f = 0; f < nF; ++f) {
    LinExpr r;
    for (std::size_t i = 0; i < nL; ++i) r.add(pi[i][f], 1.0);
    r.add(z[f], -1.0);
    m.add_row(r, Sense::EQ, 0.0);
  }
  for (std::size_t f2 = 0; f2 < nF; ++f2) {
    LinExpr r = ownF;
    for (std::size_t i = 0; i < nL; ++i) r.add(xL[i], -nf.UF[i][f2]);
    m.add_row(r, Sense::GE, 0.0);
  }
  m.set_objective(obj, true);
  MilpResult res = m.solve();
  if (res.status != MilpStatus::Optimal) throw DomainError("nf_milp_sse: solver did not reach optimality");
  out.value = res.objective;
  std::size_t bf = 0;
  for (std::size_t f = 1; f < nF; ++f)
    if (res.x[z[f]] > res.x[z[bf]]) bf = f;
  std::vector<double> x(nL);
  for (std::size_t i = 0; i < nL; ++i) x[i] = res.x[xL[i]];
  detail::snap_row(x);
  for (std::size_t i = 0; i < nL; ++i)
    if (x[i] > 0) out.mixture.emplace_back(x[i], nf.leader[i]);
  out.follower = nf.follower[bf];
  out.behaviour = mixture_to_behaviour(out.mixture, *sp.game);
  return out;
}

}  // namespace sse
