#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "sse/milp.hpp"
#include "sse/vectors.hpp"

namespace sse {

struct BackupOptions {
  // Binary selectors for every conditional of the credible set, as in the
  // appendix table. Off: selectors only where the objective reads them; other
  // conditionals get lower bounds, which leaves the optimum unchanged.
  bool full_model = false;
  double big_m_scale = 1.0;
  // Second pass on the winning solution: hold the member's value and push up
  // the leader value of every conditional, so rule entries outside the
  // member's support are not left arbitrary.
  bool refine = true;
  // leader rule must not depend on anything but the current state
  bool markov_leader = false;
  MilpOptions milp;
};

struct BackupSolution {
  bool feasible = false;
  bool timed_out = false;
  int member = -1;
  int gamma = -1;
  LeaderRule rule;
  Selection sel;
  double qL = -kInf;           // exact leader value of the solution at the member
  double objective = -kInf;    // solver objective
  std::vector<double> qF;      // follower value per member
  int vars = 0, rows = 0, binaries = 0;
};

namespace detail {

// Snaps solver noise: probabilities within 1e-7 of a small-denominator
// fraction are moved onto it, then the row is renormalized.
inline void snap_row(std::vector<double>& d) {
  double tot = 0;
  for (double& p : d) {
    p = std::clamp(p, 0.0, 1.0);
    for (int den = 1; den <= 24; ++den) {
      double k = std::round(p * den);
      if (std::abs(p - k / den) < 1e-7) {
        p = k / den;
        break;
      }
    }
    tot += p;
  }
  if (tot <= 0) throw DomainError("leader rule row has no mass");
  for (double& p : d) p /= tot;
}

// Per (conditional, aF, s') successor mass written as terms over the leader
// rule entries: mass = Σ coef·δ(a|h) landing in slot.
struct MassTerm {
  int hidx, a;  // index into the rule's history list and leader action
  double coef;
  int slot;
};

}  // namespace detail

// Floors for the refinement passes. The first pass keeps member o's value and
// maximizes the leader value summed over all conditionals. The second also
// keeps that sum and minimizes the follower value on conditionals outside o,
// so deviations are deterred wherever it costs the leader nothing.
struct RefinePass {
  double member_floor = -kInf;
  std::optional<double> leader_sum_floor;
};

// Greedy backup MILP at member o of c against next-stage Γ. With floor set,
// the model is a refinement pass with selectors everywhere.
inline BackupSolution greedy_backup_milp(const CredibleSet& c, const CondIndex& ix, int o, const VectorSet& G,
                                         HistorySpace& sp, const BackupOptions& opt = {},
                                         const RefinePass* floor = nullptr) {
  const Game& g = *sp.game;
  const int t = c.stage;
  const double M = big_m(g) * opt.big_m_scale;
  const double V = 2 * M;  // bound on value variables
  const double gam = g.gamma, disc = g.discount_pow(t);
  if (G.pairs.empty()) throw DomainError("greedy_backup_milp: empty vector set");

  MilpModel m;
  BackupSolution sol;
  sol.member = o;
  sol.gamma = G.id;

  // leader rule variables
  std::vector<HistId> H = leader_histories(c);
  std::unordered_map<HistId, int> hpos;
  std::vector<std::vector<int>> dvar(H.size(), std::vector<int>(g.nAL(), -1));
  std::map<int, std::size_t> by_state;  // Markov rules share one row per state
  for (std::size_t i = 0; i < H.size(); ++i) {
    hpos[H[i]] = int(i);
    const int st = sp.L.state(H[i]);
    const auto& ch = g.leader_choices(st);
    if (ch.size() == 1) continue;
    if (opt.markov_leader) {
      auto [it, fresh] = by_state.try_emplace(st, i);
      if (!fresh) {
        dvar[i] = dvar[it->second];
        continue;
      }
    }
    LinExpr row;
    for (int a : ch) row.add(dvar[i][a] = m.add_var(0, 1), 1.0);
    m.add_row(row, Sense::EQ, 1.0);
  }
  // δ(a|h) as an expression: a variable, the constant 1 for forced moves, or 0
  auto delta_into = [&](LinExpr& e, int hi, int a, double coef) {
    const auto& ch = g.leader_choices(sp.L.state(H[hi]));
    if (ch.size() == 1) {
      if (ch[0] == a) e.constant += coef;
    } else if (dvar[hi][a] >= 0) {
      e.add(dvar[hi][a], coef);
    }
  };

  std::vector<bool> own(ix.conds.size(), false);
  for (auto& [k, w] : ix.of[o]) own[k] = true;

  const std::size_t K = ix.conds.size();
  std::vector<int> gF(K, -1), gL(K, -1);
  std::vector<std::vector<int>> kappa(K);
  std::vector<std::map<int, std::vector<int>>> cand(K);    // s' -> candidate pairs
  std::vector<std::map<int, std::vector<int>>> wvar(K);    // s' -> binaries aligned with cand

  for (std::size_t k = 0; k < K; ++k) {
    const auto& x = ix.conds[k];
    const int s = x.support.front().s;
    const auto& fch = g.follower_choices(s);
    const bool upper = own[k] || opt.full_model || floor;
    const bool scored = own[k] || floor;

    // successor mass terms per aF and s'
    std::vector<std::map<int, std::vector<detail::MassTerm>>> terms(fch.size());
    std::vector<LinExpr> nuL(fch.size()), nuF(fch.size());
    for (std::size_t j = 0; j < fch.size(); ++j) {
      int aF = fch[j];
      for (const auto& e : x.support) {
        int hi = hpos.at(e.hL);
        for (int aL : g.leader_choices(e.s)) {
          double rl = 0, rf = 0;
          for (const auto& sc : g.succ(e.s, aL, aF)) {
            rl += sc.p * g.rL(e.s, aL, aF, sc.s2);
            rf += sc.p * g.rF(e.s, aL, aF, sc.s2);
            int slot = G.resolve(sp.extend_leader(e.hL, aL, sc.s2), sp.L);
            terms[j][sc.s2].push_back({hi, aL, e.p * sc.p, slot});
          }
          delta_into(nuL[j], hi, aL, e.p * rl);
          delta_into(nuF[j], hi, aL, e.p * rf);
        }
      }
    }

    // candidate pairs per s': Pareto-undominated on the slots x can reach
    std::map<int, std::vector<int>> slots;
    for (auto& tj : terms)
      for (auto& [s2, tv] : tj)
        for (auto& mt : tv)
          if (mt.slot >= 0) slots[s2].push_back(mt.slot);
    for (auto& tj : terms)
      for (auto& [s2, tv] : tj) slots[s2];
    for (auto& [s2, sl] : slots) {
      std::sort(sl.begin(), sl.end());
      sl.erase(std::unique(sl.begin(), sl.end()), sl.end());
      auto val = [&](int p, Player who, int i) {
        const auto& a = G.pairs[p];
        const auto& v = who == Player::Leader ? a.L : a.F;
        return v.empty() ? 0.0 : v[i];
      };
      std::vector<int> keep;
      for (int p = 0; p < int(G.pairs.size()); ++p) {
        bool dominated = false;
        for (int q = 0; q < int(G.pairs.size()) && !dominated; ++q) {
          if (q == p) continue;
          bool ge = true, gt = false;
          for (int i : sl) {
            double df = val(q, Player::Follower, i) - val(p, Player::Follower, i);
            double dl = upper ? val(q, Player::Leader, i) - val(p, Player::Leader, i) : 0.0;
            if (df < 0 || dl < 0) { ge = false; break; }
            if (df > 0 || dl > 0) gt = true;
          }
          dominated = ge && (gt || q < p);
        }
        if (!dominated) keep.push_back(p);
      }
      cand[k][s2] = keep;
    }

    auto alpha_expr = [&](const std::vector<detail::MassTerm>& tv, int p, Player who) {
      LinExpr e;
      const auto& a = G.pairs[p];
      const auto& v = who == Player::Leader ? a.L : a.F;
      for (const auto& mt : tv)
        if (mt.slot >= 0 && !v.empty()) delta_into(e, mt.hidx, mt.a, mt.coef * v[mt.slot]);
      return e;
    };

    if (upper && fch.size() > 1) {
      LinExpr one;
      for (std::size_t j = 0; j < fch.size(); ++j) one.add(kappa[k].emplace_back(m.add_var(0, 1, true)), 1.0);
      m.add_row(one, Sense::EQ, 1.0);
    }
    if (upper)
      for (auto& [s2, cs] : cand[k])
        if (cs.size() > 1) {
          LinExpr one;
          for (std::size_t q = 0; q < cs.size(); ++q) one.add(wvar[k][s2].emplace_back(m.add_var(0, 1, true)), 1.0);
          m.add_row(one, Sense::EQ, 1.0);
        }
    // M·(1−κ) gate as an expression (zero when the action is forced)
    auto gate = [&](LinExpr& e, std::size_t j, double sign) {
      if (kappa[k].empty()) return;
      e.constant += sign * M;
      e.add(kappa[k][j], -sign * M);
    };

    gF[k] = m.add_var(-V, V);
    if (scored) gL[k] = m.add_var(-V, V);
    for (std::size_t j = 0; j < fch.size(); ++j) {
      LinExpr QF = nuF[j], QL = nuL[j];
      for (auto& [s2, tv] : terms[j]) {
        const auto& cs = cand[k].at(s2);
        if (cs.size() == 1) {
          QF += alpha_expr(tv, cs[0], Player::Follower).scale(gam);
          if (scored) QL += alpha_expr(tv, cs[0], Player::Leader).scale(gam);
          continue;
        }
        int bF = m.add_var(-V, V);
        QF.add(bF, gam);
        int bL = -1;
        if (scored) QL.add(bL = m.add_var(-V, V), gam);
        for (std::size_t q = 0; q < cs.size(); ++q) {
          LinExpr aF_ = alpha_expr(tv, cs[q], Player::Follower);
          LinExpr lo = aF_;
          lo.add(bF, -1.0);
          m.add_row(lo, Sense::LE, 0.0);  // β_F ≥ α_F(μ)
          if (!upper) continue;
          int wv = wvar[k][s2][q];
          LinExpr hi = aF_;  // β_F ≤ α_F(μ) + M(1−w) + M(1−κ)
          hi.add(bF, -1.0);
          hi.constant += M;
          hi.add(wv, -M);
          gate(hi, j, 1.0);
          m.add_row(hi, Sense::GE, 0.0);
          if (!scored) continue;
          LinExpr al = alpha_expr(tv, cs[q], Player::Leader);
          LinExpr up = al;  // β_L ≤ α_L(μ) + M(1−w) + M(1−κ)
          up.add(bL, -1.0);
          up.constant += M;
          up.add(wv, -M);
          gate(up, j, 1.0);
          m.add_row(up, Sense::GE, 0.0);
          LinExpr dn = al;  // β_L ≥ α_L(μ) − M(1−w) − M(1−κ)
          dn.add(bL, -1.0);
          dn.constant -= M;
          dn.add(wv, M);
          gate(dn, j, -1.0);
          m.add_row(dn, Sense::LE, 0.0);
        }
      }
      // g_F ≥ Q_F(aF); g_F ≤ Q_F(aF) + M(1−κ)
      LinExpr r1 = QF;
      r1.add(gF[k], -1.0);
      m.add_row(r1, Sense::LE, 0.0);
      if (upper) {
        LinExpr r2 = QF;
        r2.add(gF[k], -1.0);
        gate(r2, j, 1.0);
        m.add_row(r2, Sense::GE, 0.0);
      }
      if (scored) {
        LinExpr r3 = QL;  // g_L ≤ Q_L + M(1−κ)
        r3.add(gL[k], -1.0);
        gate(r3, j, 1.0);
        m.add_row(r3, Sense::GE, 0.0);
        LinExpr r4 = QL;  // g_L ≥ Q_L − M(1−κ)
        r4.add(gL[k], -1.0);
        gate(r4, j, -1.0);
        m.add_row(r4, Sense::LE, 0.0);
      }
    }
  }

  auto qF_expr = [&](int mi) {
    LinExpr e;
    e.constant = c.members[mi].rhoF;
    for (auto& [k, w] : ix.of[mi]) e.add(gF[k], disc * w);
    return e;
  };
  LinExpr qo = qF_expr(o);
  for (int mi = 0; mi < int(c.members.size()); ++mi) {
    if (mi == o) continue;
    LinExpr d = qo;
    LinExpr other = qF_expr(mi);
    d += other.scale(-1.0);
    m.add_row(d, Sense::GE, 0.0);
  }
  LinExpr obj;
  obj.constant = c.members[o].rhoL;
  for (auto& [k, w] : ix.of[o]) obj.add(gL[k], disc * w);
  if (floor) {
    m.add_row(obj, Sense::GE, floor->member_floor);
    LinExpr all, dev;
    for (int mi = 0; mi < int(c.members.size()); ++mi)
      for (auto& [k, w] : ix.of[mi]) {
        all.add(gL[k], disc * w);
        if (!own[k]) dev.add(gF[k], disc * w);
      }
    if (floor->leader_sum_floor) {
      m.add_row(all, Sense::GE, *floor->leader_sum_floor);
      m.set_objective(dev, false);
    } else {
      m.set_objective(all, true);
    }
  } else {
    m.set_objective(obj, true);
  }

  sol.vars = m.num_vars();
  sol.rows = m.num_rows();
  sol.binaries = m.num_binaries();
  MilpResult r = m.solve(opt.milp);
  if (r.status == MilpStatus::Infeasible) return sol;
  if (r.status == MilpStatus::TimeLimit) sol.timed_out = true;
  if (r.status == MilpStatus::Error) throw DomainError("MILP backend error");
  if (!r.has_incumbent) return sol;
  sol.objective = r.objective;

  // leader rule
  sol.rule.stage = t;
  for (std::size_t i = 0; i < H.size(); ++i) {
    std::vector<double> d(g.nAL(), 0.0);
    const auto& ch = g.leader_choices(sp.L.state(H[i]));
    if (ch.size() == 1)
      d[ch[0]] = 1.0;
    else
      for (int a : ch) d[a] = r.x[dvar[i][a]];
    detail::snap_row(d);
    sol.rule.dist[H[i]] = std::move(d);
  }

  // selections: solver's choice where it has binaries, otherwise the
  // lexicographic follower response to the rule
  auto rule_fn = [&](HistId h) -> const std::vector<double>& { return sol.rule.at(h); };
  sol.sel.kappa.assign(K, -1);
  sol.sel.w.assign(K, {});
  std::vector<double> gFv(K), gLv(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& x = ix.conds[k];
    const int s = x.support.front().s;
    const auto& fch = g.follower_choices(s);
    int forced = -1;
    if (!kappa[k].empty()) {
      std::size_t jb = 0;
      for (std::size_t j = 1; j < fch.size(); ++j)
        if (r.x[kappa[k][j]] > r.x[kappa[k][jb]]) jb = j;
      forced = fch[jb];
    } else if (own[k] || opt.full_model || floor) {
      forced = fch[0];
    }
    double bestF = -kInf, bestL = -kInf;
    for (int aF : fch) {
      if (forced >= 0 && aF != forced) continue;
      double vF = 0, vL = 0;
      std::map<int, int> wk;
      for (const auto& e : x.support) {
        const auto& d = sol.rule.at(e.hL);
        for (int aL = 0; aL < g.nAL(); ++aL)
          if (d[aL] > 0)
            for (const auto& sc : g.succ(e.s, aL, aF)) {
              vF += e.p * d[aL] * sc.p * g.rF(e.s, aL, aF, sc.s2);
              vL += e.p * d[aL] * sc.p * g.rL(e.s, aL, aF, sc.s2);
              wk[sc.s2];
            }
      }
      for (auto& [s2, pick] : wk) {
        auto mu = successor_mass(x.support, rule_fn, aF, s2, sp, G);
        auto wv = wvar[k].find(s2);
        if (forced >= 0 && wv != wvar[k].end()) {
          const auto& cs = cand[k].at(s2);
          std::size_t qb = 0;
          for (std::size_t q = 1; q < cs.size(); ++q)
            if (r.x[wv->second[q]] > r.x[wv->second[qb]]) qb = q;
          pick = cs[qb];
        } else if (forced >= 0 && cand[k].count(s2) && cand[k].at(s2).size() == 1) {
          pick = cand[k].at(s2)[0];
        } else {
          pick = best_pair_for(G, mu);
        }
        const auto& a = G.pairs[pick];
        vF += gam * (a.F.empty() ? 0 : dot(mu, a.F));
        vL += gam * (a.L.empty() ? 0 : dot(mu, a.L));
      }
      if (vF > bestF + kTieTol || (vF >= bestF - kTieTol && vL > bestL + kTieTol)) {
        bestF = vF;
        bestL = vL;
        sol.sel.kappa[k] = aF;
        sol.sel.w[k] = wk;
      }
    }
    gFv[k] = bestF;
    gLv[k] = bestL;
  }
  sol.qF.resize(c.members.size());
  for (std::size_t mi = 0; mi < c.members.size(); ++mi) {
    sol.qF[mi] = c.members[mi].rhoF;
    for (auto& [k, w] : ix.of[mi]) sol.qF[mi] += disc * w * gFv[k];
  }
  sol.qL = c.members[o].rhoL;
  for (auto& [k, w] : ix.of[o]) sol.qL += disc * w * gLv[k];
  sol.feasible = true;
  return sol;
}

}  // namespace sse
