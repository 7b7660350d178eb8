#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sse/backup.hpp"

namespace sse {

enum class Variant { H, S };

enum class LeaderExpansion { Pure, UniformMixed };

struct SolverConfig {
  Variant variant = Variant::H;
  double epsilon_expand = 0.01;
  double epsilon_prune = 1e-6;
  int max_credible_sets = 1;
  int max_occupancy = 5;
  std::uint64_t seed = 0;
  int pool_size = 1;
  int max_iterations = 20;
  double time_budget = 600;  // seconds
  // Uniform mixing over every leader action keeps all successor leader
  // histories in the sample; above this many (history, action) entries the
  // expansion samples a pure rule instead.
  LeaderExpansion leader_expansion = LeaderExpansion::UniformMixed;
  int max_mixed_entries = 64;
  BackupOptions backup;

  void check() const {
    if (!(epsilon_expand > 0) || !(epsilon_prune >= 0)) throw DomainError("thresholds must be positive");
    if (max_credible_sets < 1 || max_occupancy < 1 || max_iterations < 1) throw DomainError("caps must be >= 1");
  }
};

inline const char* variant_name(Variant v) { return v == Variant::H ? "H" : "S"; }

// Extracted equilibrium policy, keyed on the histories of an evaluation space.
struct SsePolicy {
  LeaderPolicy leader;
  FollowerPolicy follower;
  double value = 0;
  std::vector<int> chain;  // Γ id per stage
};

struct SolveResult {
  SsePolicy policy;
  double value = 0;
  std::vector<double> history;  // root value per iteration
  std::string status = "ok";    // ok | budget
  int iterations = 0;
  std::size_t vf_size = 0;
  double seconds = 0;
  nlohmann::json manifest;
};

// State of one PBVI run.
class Pbvi {
 public:
  Pbvi(const Game& g, SolverConfig cfg)
      : g_(g), cfg_(std::move(cfg)), sp_(g) {
    cfg_.check();
    cfg_.backup.markov_leader = cfg_.variant == Variant::S;
    samples_.resize(g.horizon + 1);
    store_.lambda.resize(g.horizon + 1);
    CredibleSet c0 = initial_credible_set(sp_);
    c0.id = next_set_id_++;
    samples_[0].push_back(std::move(c0));
    VectorSet& z = store_.make(g.horizon);
    make_zero_set(z);
    store_.lambda[g.horizon].push_back(z.id);
  }

  HistorySpace& space() { return sp_; }
  const VectorStore& store() const { return store_; }
  const std::vector<std::vector<CredibleSet>>& samples() const { return samples_; }
  std::vector<std::vector<CredibleSet>>& samples() { return samples_; }
  std::vector<int>& lambda(int t) { return store_.lambda[t]; }

  LeaderRule sample_leader_rule(const CredibleSet& c, std::mt19937_64& rng) {
    LeaderRule r;
    r.stage = c.stage;
    auto H = leader_histories(c);
    std::size_t entries = 0;
    for (HistId h : H) entries += g_.leader_choices(sp_.L.state(h)).size();
    bool mixed = cfg_.leader_expansion == LeaderExpansion::UniformMixed && entries <= std::size_t(cfg_.max_mixed_entries);
    std::map<int, std::vector<double>> per_state;
    for (HistId h : H) {
      const int s = sp_.L.state(h);
      if (cfg_.variant == Variant::S && per_state.count(s)) {
        r.dist[h] = per_state[s];
        continue;
      }
      const auto& ch = g_.leader_choices(s);
      std::vector<double> d(g_.nAL(), 0.0);
      if (mixed) {
        for (int a : ch) d[a] = 1.0 / double(ch.size());
      } else {
        d[ch[std::uniform_int_distribution<std::size_t>(0, ch.size() - 1)(rng)]] = 1.0;
      }
      if (cfg_.variant == Variant::S) per_state[s] = d;
      r.dist[h] = std::move(d);
    }
    return r;
  }

  // Follower rules tried from member o: all of them when few enough, else
  // max_occupancy uniform draws.
  std::vector<FollowerRule> follower_rules(const OccupancyState& o, std::mt19937_64& rng) {
    std::vector<FollowerRule> out;
    if (follower_rule_count(o, sp_) <= cfg_.max_occupancy) {
      for_each_follower_rule(o, sp_, [&](const FollowerRule& r) { out.push_back(r); });
      return out;
    }
    auto hs = follower_histories(o);
    for (int k = 0; k < cfg_.max_occupancy; ++k) {
      FollowerRule r;
      r.stage = o.stage;
      for (HistId h : hs) {
        const auto& ch = g_.follower_choices(sp_.F.state(h));
        r.act[h] = ch[std::uniform_int_distribution<std::size_t>(0, ch.size() - 1)(rng)];
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  // Sample growth for one stage.
  void expand(int t, std::mt19937_64& rng) {
    auto& next = samples_[t + 1];
    for (const CredibleSet& c : samples_[t]) {
      LeaderRule dL = sample_leader_rule(c, rng);
      CredibleSet nc;
      nc.stage = t + 1;
      nc.rule_history = c.rule_history;
      nc.rule_history.push_back(next_rule_id_++);
      std::vector<ConditionalOccupancy> admitted;
      // parent members take turns so that each one seeds successors
      std::vector<std::vector<ConditionalOccupancy>> conds;
      std::vector<std::vector<FollowerRule>> rules;
      std::size_t rounds = 0;
      for (const OccupancyState& o : c.members) {
        conds.push_back(condition_on_follower(o));
        rules.push_back(follower_rules(o, rng));
        rounds = std::max(rounds, rules.back().size());
      }
      for (std::size_t k = 0; k < rounds; ++k)
        for (std::size_t oi = 0; oi < c.members.size(); ++oi) {
          if (k >= rules[oi].size() || int(nc.members.size()) >= cfg_.max_occupancy) continue;
          const OccupancyState& o = c.members[oi];
          const FollowerRule& dF = rules[oi][k];
          bool interesting = false;
          for (const auto& x : conds[oi]) {
            int aF = dF.at(x.hF);
            std::vector<int> succ;
            for (const auto& e : x.support)
              for (int aL = 0; aL < g_.nAL(); ++aL)
                if (dL.at(e.hL)[aL] > 0)
                  for (const auto& sc : g_.succ(e.s, aL, aF)) succ.push_back(sc.s2);
            std::sort(succ.begin(), succ.end());
            succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
            for (int s2 : succ) {
              auto [eta, x2] = conditional_step(x, dL, aF, s2, sp_);
              if (eta <= 0) continue;
              double dmin = kInf;
              for (const auto& y : admitted) dmin = std::min(dmin, l1_distance(x2, y));
              if (admitted.empty() || dmin > cfg_.epsilon_expand) {
                interesting = true;
                admitted.push_back(std::move(x2));
              }
            }
          }
          if (!interesting) continue;
          OccupancyState o2 = tau_advance(o, dL, dF, sp_);
          bool dup = false;
          for (const auto& q : nc.members) dup = dup || occupancy_equal(q, o2);
          if (!dup) nc.members.push_back(std::move(o2));
        }
      if (nc.members.empty()) continue;
      canonicalize(nc);
      if (cfg_.variant == Variant::S) nc = filter(nc, g_.nS());
      if (int(next.size()) >= cfg_.max_credible_sets) continue;
      double dmin = kInf;
      for (const auto& q : next) dmin = std::min(dmin, hausdorff_distance(q, nc));
      if (next.empty() || dmin > cfg_.epsilon_expand) {
        nc.id = next_set_id_++;
        next.push_back(std::move(nc));
      }
    }
  }

  // One backup stage: best (member, Γ) MILP per sample, refined, then
  // materialized as a new Γ.
  void backup_stage(int t) {
    for (const CredibleSet& c : samples_[t]) {
      CondIndex ix = index_conditionals(c);
      std::vector<BackupSolution> per(c.members.size());
      int arg = -1;
      for (int o = 0; o < int(c.members.size()); ++o) {
        for (int gid : store_.lambda[t + 1]) {
          check_budget();
          BackupSolution s = greedy_backup_milp(c, ix, o, store_.at(gid), sp_, cfg_.backup);
          ++milp_count_;
          if (s.feasible && s.qL > per[o].qL + kTieTol) per[o] = std::move(s);
        }
        if (per[o].feasible && (arg < 0 || per[o].qL > per[arg].qL + kTieTol)) arg = o;
      }
      if (arg < 0) throw DomainError("backup: no feasible (member, vector set) pair at stage " + std::to_string(t));
      if (cfg_.backup.refine) {
        BackupSolution& b = per[arg];
        RefinePass pass;
        pass.member_floor = b.objective - 1e-9;
        for (int round = 0; round < 2; ++round) {
          check_budget();
          BackupSolution r = greedy_backup_milp(c, ix, b.member, store_.at(b.gamma), sp_, cfg_.backup, &pass);
          ++milp_count_;
          if (!r.feasible || r.qL < b.qL - 1e-9) break;
          if (round == 0) pass.leader_sum_floor = r.objective - 1e-9;
          b = std::move(r);
        }
      }
      VectorSet& G = store_.make(t);
      G.origin = c.id;
      build_vector_set(G, c, ix, per[arg].rule, per[arg].sel, store_.at(per[arg].gamma), sp_);
      store_.lambda[t].push_back(G.id);
    }
  }

  // Bounded pruning: keep the Γ that is the argmax at some sample.
  std::vector<int> bounded_pruning(const std::vector<int>& lambda, const std::vector<CredibleSet>& samples) const {
    std::vector<bool> keep(lambda.size(), false);
    for (const auto& c : samples) {
      SetValue best;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        SetValue v = vectorset_value(store_.at(lambda[i]), c, sp_);
        if (v.value > best.value + kTieTol) {
          best = v;
          arg = i;
        }
      }
      if (!lambda.empty()) keep[arg] = true;
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (keep[i]) out.push_back(lambda[i]);
    return out;
  }

  // Drop samples whose value is reproduced by an earlier kept one.
  std::vector<CredibleSet> prune_uncredible(const std::vector<int>& lambda, const std::vector<CredibleSet>& samples,
                                            double eps) const {
    std::vector<int> arg(samples.size(), -1);
    for (std::size_t i = 0; i < samples.size(); ++i) arg[i] = leader_value(store_, lambda, samples[i], sp_).set;
    std::vector<CredibleSet> kept;
    std::vector<int> kept_arg;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double own = vectorset_value(store_.at(arg[i]), samples[i], sp_).value;
      bool keep = true;
      for (int a : kept_arg)
        if (!(std::abs(own - vectorset_value(store_.at(a), samples[i], sp_).value) > eps)) keep = false;
      if (keep) {
        kept.push_back(samples[i]);
        kept_arg.push_back(arg[i]);
      }
    }
    return kept;
  }

  double root_value() const { return leader_value(store_, store_.lambda[0], samples_[0][0], sp_).value; }

  std::size_t vf_size() const {
    std::vector<int> ids;
    for (const auto& l : store_.lambda) ids.insert(ids.end(), l.begin(), l.end());
    return sse::vf_size(store_, ids);
  }

  // Unrolls backpointers from the root into policies over the histories of
  // eval. The leader acts at a real history as at its counterpart in the Γ
  // domain; counterparts are advanced along the real actions and states.
  SsePolicy extract_policy(HistorySpace& eval) {
    SsePolicy pol;
    SetValue root = leader_value(store_, store_.lambda[0], samples_[0][0], sp_);
    pol.value = root.value;
    const int T = g_.horizon;
    int gid = root.set;
    for (int t = 0; t < T; ++t) {
      pol.chain.push_back(gid);
      gid = store_.at(gid).next_set;
      if (gid < 0) throw DomainError("extract_policy: dangling backpointer at stage " + std::to_string(t));
    }
    pol.chain.push_back(gid);
    pol.leader.rules.resize(T);
    pol.follower.rules.resize(T);

    int s0 = g_.initial_state;
    std::map<HistId, HistId> lf{{eval.L.root(s0), sp_.L.root(s0)}};
    const VectorSet& G0 = store_.at(pol.chain[0]);
    auto x0 = condition_on_follower(samples_[0][0].members[0]).front();
    std::map<HistId, int> ff{{eval.F.root(s0), select_pair(G0, x0, sp_.L)}};
    for (int t = 0; t < T; ++t) {
      const VectorSet& G = store_.at(pol.chain[t]);
      const VectorSet& Gn = store_.at(pol.chain[t + 1]);
      auto& lr = pol.leader.rules[t];
      auto& fr = pol.follower.rules[t];
      lr.stage = fr.stage = t;
      std::map<HistId, HistId> lf2;
      for (auto [h, v] : lf) {
        int s = eval.L.state(h);
        int slot = G.resolve(v, sp_.L);
        std::vector<double> d(g_.nAL(), 0.0);
        if (slot >= 0) {
          v = G.domain[slot];
          d = G.rule.at(v);
        } else {
          d[g_.leader_choices(s)[0]] = 1.0;
        }
        lr.dist[h] = d;
        for (int aL = 0; aL < g_.nAL(); ++aL) {
          if (d[aL] <= 0) continue;
          for (int aF : g_.follower_choices(s))
            for (const auto& sc : g_.succ(s, aL, aF))
              lf2.emplace(eval.extend_leader(h, aL, sc.s2), sp_.extend_leader(v, aL, sc.s2));
        }
      }
      lf.swap(lf2);
      std::map<HistId, int> ff2;
      for (auto [h, p] : ff) {
        int s = eval.F.state(h);
        const AlphaPair& a = G.pairs.at(p);
        int aF = a.aF >= 0 ? g_.canonical_follower(s, a.aF) : g_.follower_choices(s)[0];
        fr.act[h] = aF;
        for (int aL : g_.leader_choices(s))
          for (const auto& sc : g_.succ(s, aL, aF)) {
            auto it = a.next.find(sc.s2);
            int pn = it != a.next.end() ? it->second : 0;
            if (pn >= int(Gn.pairs.size())) pn = 0;
            ff2.emplace(eval.extend_follower(h, aF, sc.s2), pn);
          }
      }
      ff.swap(ff2);
    }
    return pol;
  }

  SolveResult solve() {
    start_ = std::chrono::steady_clock::now();
    SolveResult res;
    std::optional<double> prev;
    nlohmann::json iters = nlohmann::json::array();
    bool pruned = true;
    for (int it = 0; it < cfg_.max_iterations; ++it) {
      bool grew = false;
      try {
        for (int t = 0; t < g_.horizon; ++t) {
          std::seed_seq seq{std::uint64_t(cfg_.seed), std::uint64_t(it), std::uint64_t(t)};
          std::mt19937_64 rng(seq);
          std::size_t before = samples_[t + 1].size();
          expand(t, rng);
          grew = grew || samples_[t + 1].size() != before;
        }
        // same samples and same Λ give the same backups: converged
        if (!grew && prev && !pruned) {
          res.history.push_back(*prev);
          ++res.iterations;
          break;
        }
        for (int t = g_.horizon - 1; t >= 0; --t) backup_stage(t);
      } catch (const BudgetError&) {
        if (!prev) throw;
        res.status = "budget";
        break;
      }
      pruned = false;
      for (int t = 0; t < g_.horizon; ++t) {
        std::size_t nl = store_.lambda[t].size(), ns = samples_[t].size();
        store_.lambda[t] = bounded_pruning(store_.lambda[t], samples_[t]);
        if (t > 0) samples_[t] = prune_uncredible(store_.lambda[t], samples_[t], cfg_.epsilon_prune);
        pruned = pruned || store_.lambda[t].size() != nl || samples_[t].size() != ns;
      }
      double v = root_value();
      res.history.push_back(v);
      nlohmann::json rec = {{"iteration", it}, {"root_value", v}, {"vf_size", vf_size()}};
      nlohmann::json sizes = nlohmann::json::array();
      for (const auto& s : samples_) {
        std::size_t occ = 0;
        for (const auto& c : s) occ += c.members.size();
        sizes.push_back({{"sets", s.size()}, {"occupancies", occ}});
      }
      rec["samples"] = sizes;
      iters.push_back(rec);
      ++res.iterations;
      bool done = prev && std::abs(v - *prev) < 1e-6;
      prev = v;
      if (done) break;
    }
    res.value = *prev;
    res.vf_size = vf_size();
    res.seconds = elapsed();
    res.manifest = {{"variant", variant_name(cfg_.variant)},
                    {"epsilon_expand", cfg_.epsilon_expand},
                    {"epsilon_prune", cfg_.epsilon_prune},
                    {"max_credible_sets", cfg_.max_credible_sets},
                    {"max_occupancy", cfg_.max_occupancy},
                    {"seed", cfg_.seed},
                    {"max_iterations", cfg_.max_iterations},
                    {"leader_expansion", cfg_.leader_expansion == LeaderExpansion::Pure ? "pure" : "uniform_mixed"},
                    {"iterations", iters},
                    {"milp_solves", milp_count_},
                    {"vf_size", res.vf_size},
                    {"status", res.status},
                    {"wall_time_s", res.seconds}};
    return res;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  void check_budget() const {
    if (elapsed() > cfg_.time_budget) throw BudgetError("PBVI wall-clock budget exhausted");
  }

  const Game& g_;
  SolverConfig cfg_;
  HistorySpace sp_;
  std::vector<std::vector<CredibleSet>> samples_;
  VectorStore store_;
  int next_set_id_ = 0, next_rule_id_ = 0;
  long milp_count_ = 0;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Runs PBVI and extracts the policy over histories of eval (full histories).
inline SolveResult solve_sse(const Game& g, const SolverConfig& cfg, HistorySpace& eval) {
  Pbvi run(g, cfg);
  SolveResult r = run.solve();
  r.policy = run.extract_policy(eval);
  return r;
}

// Closed-form exploitability bound for a sample set with covering radius σ.
inline double exploitability_bound(double m, double gamma, int horizon, double sigma) {
  if (!(gamma > 0 && gamma < 1)) throw DomainError("exploitability_bound needs 0 < gamma < 1");
  double l = horizon;
  return 2 * m * sigma / ((1 - gamma) * (1 - gamma)) *
         (1 + l * std::pow(gamma, l + 1) - (l + 1) * std::pow(gamma, l));
}

}  // namespace sse
