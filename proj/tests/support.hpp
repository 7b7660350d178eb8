#pragma once
// Shared fixtures for unit and acceptance tests: random games, Markov
// credible-set rollouts and a brute-force oracle for the backup MILP.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "sse/baselines.hpp"
#include "sse/benchmarks.hpp"
#include "sse/pbvi.hpp"

namespace sse::fixtures {

struct RandomGameSpec {
  int nS = 2, nAL = 2, nAF = 2, horizon = 2;
  int max_succ = 2;      // successor states per (s, aL, aF)
  int reward_range = 3;  // integer rewards in [-r, r]
};

// Integer rewards and dyadic probabilities keep every value exact in binary
// floating point, so "exact agreement" tests are meaningful.
inline Game random_game(std::mt19937_64& rng, const RandomGameSpec& sp) {
  Game g;
  for (int s = 0; s < sp.nS; ++s) g.states.push_back("s" + std::to_string(s));
  for (int a = 0; a < sp.nAL; ++a) g.leader_actions.push_back("l" + std::to_string(a));
  for (int a = 0; a < sp.nAF; ++a) g.follower_actions.push_back("f" + std::to_string(a));
  g.horizon = sp.horizon;
  g.gamma = 1.0;
  g.resize();
  std::uniform_int_distribution<int> st(0, sp.nS - 1), rw(-sp.reward_range, sp.reward_range), coin(0, 1);
  for (int s = 0; s < sp.nS; ++s)
    for (int a = 0; a < sp.nAL; ++a)
      for (int b = 0; b < sp.nAF; ++b) {
        int s1 = st(rng), s2 = st(rng);
        if (sp.max_succ < 2 || s1 == s2 || coin(rng)) {
          g.set_p(s, a, b, s1, 1.0);
        } else {
          double q = coin(rng) ? 0.5 : 0.25;
          g.set_p(s, a, b, s1, q);
          g.set_p(s, a, b, s2, 1 - q);
        }
        for (int x = 0; x < sp.nS; ++x) g.set_r(s, a, b, x, rw(rng), rw(rng));
      }
  g.finalize();
  return g;
}

// Markov leader policy with dyadic probabilities.
inline std::vector<std::vector<std::vector<double>>> random_markov_policy(std::mt19937_64& rng, const Game& g) {
  std::vector<std::vector<std::vector<double>>> pol(g.horizon, std::vector<std::vector<double>>(g.nS()));
  std::uniform_int_distribution<int> q(0, 4);
  for (auto& stage : pol)
    for (auto& row : stage) {
      row.assign(g.nAL(), 0.0);
      double tot = 0;
      for (double& x : row) tot += (x = q(rng));
      if (tot == 0) {
        row[0] = 1;
        tot = 1;
      }
      for (double& x : row) x /= tot;
    }
  return pol;
}

inline LeaderRule markov_rule(const CredibleSet& c, const std::vector<std::vector<double>>& rows,
                              const HistorySpace& sp) {
  LeaderRule r;
  r.stage = c.stage;
  for (HistId h : leader_histories(c)) r.dist[h] = rows[sp.L.state(h)];
  return r;
}

// terminal_reward of the unfiltered and of the recursively filtered rollout.
inline std::pair<double, double> filtered_vs_unfiltered(const Game& g,
                                                        const std::vector<std::vector<std::vector<double>>>& pol,
                                                        double cap = double(1 << 14)) {
  HistorySpace sp(g);
  CredibleSet full = initial_credible_set(sp), filt = full;
  for (int t = 0; t < g.horizon; ++t) {
    full = credible_transition(full, markov_rule(full, pol[t], sp), sp, cap);
    filt = filter(credible_transition(filt, markov_rule(filt, pol[t], sp), sp, cap), g.nS());
  }
  return {terminal_reward(full), terminal_reward(filt)};
}

// ---------------------------------------------------------------------------
// Backup oracle

// A tiny backup instance: credible set c at stage t and a next-stage Γ with
// random integer pairs over every one-step extension of c's leader histories.
struct BackupInstance {
  std::unique_ptr<Game> game_ptr;  // HistorySpace keeps a pointer to it
  const Game& game() const { return *game_ptr; }
  std::unique_ptr<HistorySpace> sp;
  CredibleSet c;
  VectorSet next;
  CondIndex ix;
};

inline std::optional<BackupInstance> random_backup_instance(std::mt19937_64& rng, int max_hist = 3) {
  RandomGameSpec gs;
  gs.nS = std::uniform_int_distribution<int>(2, 3)(rng);
  gs.nAL = 2;
  gs.nAF = std::uniform_int_distribution<int>(1, 2)(rng);
  gs.horizon = 3;
  BackupInstance in;
  in.game_ptr = std::make_unique<Game>(random_game(rng, gs));
  in.sp = std::make_unique<HistorySpace>(*in.game_ptr);
  HistorySpace& sp = *in.sp;
  in.c = initial_credible_set(sp);
  if (std::uniform_int_distribution<int>(0, 3)(rng) != 0) {  // mostly stage-1 sets
    LeaderRule d0;
    d0.stage = 0;
    int a = std::uniform_int_distribution<int>(0, 1)(rng);
    d0.dist[sp.L.root(in.game().initial_state)] = a ? std::vector<double>{0.5, 0.5} : std::vector<double>{1.0, 0.0};
    in.c = credible_transition(in.c, d0, sp);
  }
  auto H = leader_histories(in.c);
  int dims = 0;
  for (HistId h : H) dims += in.game().leader_choices(sp.L.state(h)).size() > 1;
  if (int(H.size()) > max_hist || dims == 0) return std::nullopt;
  in.ix = index_conditionals(in.c);
  if (in.ix.conds.size() > 3) return std::nullopt;

  std::vector<HistId> dom;
  for (HistId h : H)
    for (int a = 0; a < in.game().nAL(); ++a)
      for (int s2 = 0; s2 < in.game().nS(); ++s2) dom.push_back(sp.extend_leader(h, a, s2));
  std::sort(dom.begin(), dom.end());
  dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
  in.next.stage = in.c.stage + 1;
  in.next.set_domain(dom, sp.L);
  std::uniform_int_distribution<int> np(1, 2), cf(-3, 3);
  int n = np(rng);
  for (int k = 0; k < n; ++k) {
    AlphaPair a;
    for (std::size_t i = 0; i < dom.size(); ++i) {
      a.L.push_back(cf(rng));
      a.F.push_back(cf(rng));
    }
    in.next.pairs.push_back(a);
  }
  return in;
}

namespace detail {

// Affine function of the free leader variables: c0 + Σ c[i]·x[i], where x[i]
// is δ(second choice | i-th free history).
struct Affine {
  double c0 = 0;
  std::vector<double> c;
  double at(const std::vector<double>& x) const {
    double v = c0;
    for (std::size_t i = 0; i < x.size(); ++i) v += c[i] * x[i];
    return v;
  }
  Affine& axpy(double k, const Affine& o) {
    c0 += k * o.c0;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += k * o.c[i];
    return *this;
  }
};

struct OracleModel {
  int dims = 0;
  // per conditional k, per follower choice j: immediate F/L terms and, per
  // successor state, per pair p, the F/L continuation terms
  struct Branch {
    Affine immF, immL;
    std::vector<std::vector<Affine>> contF, contL;  // [s' idx][pair]
  };
  std::vector<std::vector<Branch>> cond;
};

inline OracleModel build_oracle_model(const BackupInstance& in) {
  const Game& g = in.game();
  HistorySpace& sp = *in.sp;
  auto H = leader_histories(in.c);
  std::map<HistId, int> var;  // free variable index, or -1 when forced
  OracleModel om;
  for (HistId h : H) var[h] = g.leader_choices(sp.L.state(h)).size() > 1 ? om.dims++ : -1;
  auto delta = [&](HistId h, int a) {
    Affine d;
    d.c.assign(om.dims, 0.0);
    const auto& ch = g.leader_choices(sp.L.state(h));
    int v = var.at(h);
    if (v < 0) {
      d.c0 = ch[0] == a ? 1.0 : 0.0;
    } else if (a == ch[0]) {
      d.c0 = 1.0;
      d.c[v] = -1.0;
    } else if (a == ch[1]) {
      d.c[v] = 1.0;
    }
    return d;
  };
  auto zero = [&] {
    Affine z;
    z.c.assign(om.dims, 0.0);
    return z;
  };
  for (const auto& x : in.ix.conds) {
    const int s = x.support.front().s;
    std::vector<OracleModel::Branch> br;
    for (int aF : g.follower_choices(s)) {
      OracleModel::Branch b;
      b.immF = zero();
      b.immL = zero();
      std::map<int, std::vector<Affine>> cF, cL;
      for (int s2 = 0; s2 < g.nS(); ++s2) {
        cF[s2].assign(in.next.pairs.size(), zero());
        cL[s2].assign(in.next.pairs.size(), zero());
      }
      for (const auto& e : x.support)
        for (int aL = 0; aL < g.nAL(); ++aL) {
          Affine d = delta(e.hL, aL);
          for (const auto& sc : g.succ(e.s, aL, aF)) {
            b.immF.axpy(e.p * sc.p * g.rF(e.s, aL, aF, sc.s2), d);
            b.immL.axpy(e.p * sc.p * g.rL(e.s, aL, aF, sc.s2), d);
            int slot = in.next.resolve(sp.extend_leader(e.hL, aL, sc.s2), sp.L);
            for (std::size_t p = 0; p < in.next.pairs.size(); ++p) {
              cF[sc.s2][p].axpy(e.p * sc.p * in.next.pairs[p].F[slot], d);
              cL[sc.s2][p].axpy(e.p * sc.p * in.next.pairs[p].L[slot], d);
            }
          }
        }
      for (auto& [s2, v] : cF) {
        b.contF.push_back(v);
        b.contL.push_back(cL[s2]);
      }
      br.push_back(b);
    }
    om.cond.push_back(br);
  }
  return om;
}

// Objective at point x with the follower's lexicographic responses (F, then
// L) everywhere; nullopt when member o is not the follower's preferred member.
inline std::optional<double> oracle_eval(const BackupInstance& in, const OracleModel& om, int o,
                                         const std::vector<double>& x, double tol) {
  const double gam = in.game().gamma, disc = in.game().discount_pow(in.c.stage);
  std::vector<double> gF(om.cond.size()), gL(om.cond.size());
  for (std::size_t k = 0; k < om.cond.size(); ++k) {
    double bF = -kInf, bL = -kInf;
    for (const auto& b : om.cond[k]) {
      double qF = b.immF.at(x), qL = b.immL.at(x);
      for (std::size_t s = 0; s < b.contF.size(); ++s) {
        double pf = -kInf, pl = -kInf;
        for (std::size_t p = 0; p < b.contF[s].size(); ++p) {
          double f = b.contF[s][p].at(x), l = b.contL[s][p].at(x);
          if (f > pf + tol || (f >= pf - tol && l > pl)) {
            pf = std::max(pf, f);
            pl = l;
          }
        }
        qF += gam * pf;
        qL += gam * pl;
      }
      if (qF > bF + tol || (qF >= bF - tol && qL > bL)) {
        bF = std::max(bF, qF);
        bL = qL;
      }
    }
    gF[k] = bF;
    gL[k] = bL;
  }
  auto q = [&](int mi, const std::vector<double>& v, bool leader) {
    double r = leader ? in.c.members[mi].rhoL : in.c.members[mi].rhoF;
    for (auto& [k, w] : in.ix.of[mi]) r += disc * w * v[k];
    return r;
  };
  double qo = q(o, gF, false);
  for (int mi = 0; mi < int(in.c.members.size()); ++mi)
    if (q(mi, gF, false) > qo + tol) return std::nullopt;
  return q(o, gL, true);
}

// Solves A x = b for small square systems; false when singular.
inline bool solve_small(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x) {
  const int n = int(b.size());
  for (int i = 0; i < n; ++i) {
    int piv = i;
    for (int r = i + 1; r < n; ++r)
      if (std::abs(A[r][i]) > std::abs(A[piv][i])) piv = r;
    if (std::abs(A[piv][i]) < 1e-12) return false;
    std::swap(A[i], A[piv]);
    std::swap(b[i], b[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == i) continue;
      double f = A[r][i] / A[i][i];
      for (int c = i; c < n; ++c) A[r][c] -= f * A[i][c];
      b[r] -= f * b[i];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return true;
}

}  // namespace detail

// Brute-force optimum of the backup at member o: a 1e-2 grid over the leader
// rule, plus every vertex of the arrangement of follower-indifference
// hyperplanes (where strong Stackelberg optima live and a grid misses them).
inline std::optional<double> backup_oracle(const BackupInstance& in, int o, double step = 0.01) {
  using detail::Affine;
  auto om = detail::build_oracle_model(in);
  const int d = om.dims;
  std::optional<double> best;
  auto consider = [&](const std::vector<double>& x) {
    for (double v : x)
      if (v < -1e-9 || v > 1 + 1e-9) return;
    std::vector<double> y(x);
    for (double& v : y) v = std::clamp(v, 0.0, 1.0);
    auto r = detail::oracle_eval(in, om, o, y, 1e-7);
    if (r && (!best || *r > *best)) best = r;
  };
  // grid
  int n = int(std::round(1 / step));
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i) x[i] = idx[i] * step;
    consider(x);
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[i] <= n) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  // hyperplanes: box faces and pairwise differences of every affine quantity
  // the follower compares
  std::vector<Affine> planes;
  for (int i = 0; i < d; ++i) {
    Affine a;
    a.c.assign(d, 0.0);
    a.c[i] = 1;
    planes.push_back(a);
    a.c0 = -1;
    planes.push_back(a);
  }
  auto diff = [&](const Affine& a, const Affine& b) {
    Affine r = a;
    r.axpy(-1, b);
    bool nz = false;
    for (double v : r.c) nz = nz || std::abs(v) > 1e-12;
    if (nz) planes.push_back(r);
  };
  for (const auto& br : om.cond) {
    for (const auto& b : br)
      for (const auto& cs : b.contF)
        for (std::size_t p = 0; p < cs.size(); ++p)
          for (std::size_t q = p + 1; q < cs.size(); ++q) diff(cs[p], cs[q]);
    // follower action values under every pair selection
    std::vector<Affine> acts;
    for (const auto& b : br) {
      std::vector<Affine> vals{b.immF};
      for (const auto& cs : b.contF) {
        std::vector<Affine> nx;
        for (const auto& v : vals)
          for (const auto& c : cs) nx.push_back(Affine(v).axpy(in.game().gamma, c));
        vals.swap(nx);
      }
      acts.insert(acts.end(), vals.begin(), vals.end());
    }
    for (std::size_t i = 0; i < acts.size(); ++i)
      for (std::size_t j = i + 1; j < acts.size(); ++j) diff(acts[i], acts[j]);
  }
  // member comparisons under every joint (action, pair) selection
  {
    const double disc = in.game().discount_pow(in.c.stage);
    std::vector<std::vector<Affine>> per_cond;
    for (const auto& br : om.cond) {
      std::vector<Affine> all;
      for (const auto& b : br) {
        std::vector<Affine> vals{b.immF};
        for (const auto& cs : b.contF) {
          std::vector<Affine> nx;
          for (const auto& v : vals)
            for (const auto& c : cs) nx.push_back(Affine(v).axpy(in.game().gamma, c));
          vals.swap(nx);
        }
        all.insert(all.end(), vals.begin(), vals.end());
      }
      per_cond.push_back(all);
    }
    // F value of each member under every joint selection
    auto member_values = [&](int mi) {
      std::vector<Affine> vals(1);
      vals[0].c.assign(d, 0.0);
      vals[0].c0 = in.c.members[mi].rhoF;
      for (auto& [k, w] : in.ix.of[mi]) {
        std::vector<Affine> nx;
        for (const auto& v : vals)
          for (const auto& c : per_cond[k]) nx.push_back(Affine(v).axpy(disc * w, c));
        vals.swap(nx);
      }
      return vals;
    };
    auto own = member_values(o);
    for (int mi = 0; mi < int(in.c.members.size()); ++mi) {
      if (mi == o) continue;
      for (const auto& b : member_values(mi))
        for (const auto& a : own) diff(a, b);
    }
  }
  // dedupe planes up to positive scaling
  {
    std::map<std::vector<long long>, Affine> uniq;
    for (auto& p : planes) {
      double sc = 0;
      for (double v : p.c) sc = std::max(sc, std::abs(v));
      std::vector<long long> key{std::llround(p.c0 / sc * 1e9)};
      for (double v : p.c) key.push_back(std::llround(v / sc * 1e9));
      uniq.emplace(key, p);
    }
    planes.clear();
    for (auto& [k, p] : uniq) planes.push_back(p);
  }
  // vertices: every d-subset of planes
  std::vector<int> pick(d);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == d) {
      std::vector<std::vector<double>> A(d, std::vector<double>(d));
      std::vector<double> b(d), x;
      for (int i = 0; i < d; ++i) {
        A[i] = planes[pick[i]].c;
        b[i] = -planes[pick[i]].c0;
      }
      if (detail::solve_small(A, b, x)) consider(x);
      return;
    }
    for (int i = start; i < int(planes.size()); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (d > 0) rec(0, 0);
  return best;
}

}  // namespace sse::fixtures
