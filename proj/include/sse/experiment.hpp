#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sse/baselines.hpp"
#include "sse/benchmarks.hpp"
#include "sse/pbvi.hpp"

namespace sse {

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> m{"H", "S", "BI", "MY", "LP", "MILP"};
  return m;
}

inline bool valid_method(const std::string& m) {
  for (const auto& x : method_names())
    if (x == m) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Policy files. Histories are written as their comma-joined trace
// "s0,a0,s1,..." (state ids for Markov policies) so a file can be replayed in
// a fresh history space.

inline nlohmann::json leader_policy_to_json(const HistorySpace& sp, const LeaderPolicy& p) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& r : p.rules) {
    std::map<std::string, std::vector<double>> m;
    for (const auto& [h, d] : r.dist) {
      std::string key;
      if (p.markov) {
        key = std::to_string(h);
      } else {
        for (int x : sp.L.trace(h)) key += (key.empty() ? "" : ",") + std::to_string(x);
      }
      m[key] = d;
    }
    stages.push_back(m);
  }
  return {{"markov", p.markov}, {"stages", stages}};
}

inline LeaderPolicy leader_policy_from_json(HistorySpace& sp, const nlohmann::json& j) {
  LeaderPolicy p;
  p.markov = j.at("markov").get<bool>();
  const auto& st = j.at("stages");
  p.rules.resize(st.size());
  for (std::size_t t = 0; t < st.size(); ++t) {
    p.rules[t].stage = int(t);
    for (const auto& [key, d] : st[t].items()) {
      std::vector<int> tr;
      std::stringstream ss(key);
      std::string tok;
      while (std::getline(ss, tok, ',')) tr.push_back(std::stoi(tok));
      if (tr.empty()) throw ParseError("policy file: empty history key");
      HistId h;
      if (p.markov) {
        h = tr[0];
      } else {
        if (tr.size() != 2 * t + 1) throw ParseError("policy file: history '" + key + "' has the wrong length");
        h = sp.L.root(tr[0]);
        for (std::size_t i = 1; i + 1 < tr.size(); i += 2) h = sp.extend_leader(h, tr[i], tr[i + 1]);
      }
      auto row = d.get<std::vector<double>>();
      if (int(row.size()) != sp.game->nAL()) throw ParseError("policy file: row width does not match the game");
      p.rules[t].dist[h] = row;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// One grid cell

struct ResultRow {
  std::string benchmark;
  int horizon = 0;
  std::string method;
  std::optional<double> value, exploitability;
  std::optional<std::size_t> vf_size;
  double time_s = 0;
  std::string status = "ok";  // ok | capacity | budget
  std::string note;
  nlohmann::json policy;      // leader policy file content, when one exists
  nlohmann::json manifest;
};

// Runs `method` on g. Capacity and budget failures become marked rows.
inline ResultRow run_method(const Game& g, const std::string& bench, const std::string& method,
                            const SolverConfig& base, double cap = kEnumCap) {
  if (!valid_method(method)) throw DomainError("unknown method '" + method + "'");
  ResultRow row;
  row.benchmark = bench;
  row.horizon = g.horizon;
  row.method = method;
  auto t0 = std::chrono::steady_clock::now();
  HistorySpace sp(g);
  LeaderPolicy pol;
  double claimed = 0;
  try {
    if (method == "H" || method == "S") {
      SolverConfig cfg = base;
      cfg.variant = method == "H" ? Variant::H : Variant::S;
      SolveResult r = solve_sse(g, cfg, sp);
      pol = r.policy.leader;
      claimed = r.value;
      row.value = r.value;
      row.vf_size = r.vf_size;
      row.status = r.status;
      row.manifest = r.manifest;
    } else if (method == "BI" || method == "MY") {
      BaselineResult r = backward_induction(g, method == "BI" ? BiMode::Full : BiMode::Myopic, sp);
      pol = r.leader;
      claimed = r.planned_value;
      row.value = r.value;
    } else {
      NfResult r = method == "LP" ? nf_lp_sse(sp, cap) : nf_milp_sse(sp, cap);
      pol = r.behaviour;
      claimed = r.value;
      row.value = r.value;
      row.manifest = {{"leader_policies", r.leader_policies}, {"follower_policies", r.follower_policies}};
    }
    row.exploitability = measured_exploitability(sp, pol, claimed);
    if (std::abs(*row.exploitability) < 1e-12) row.exploitability = 0.0;
    row.policy = {{"benchmark", bench},         {"horizon", g.horizon}, {"method", method},
                  {"claimed_value", claimed},   {"exploitability", *row.exploitability},
                  {"leader", leader_policy_to_json(sp, pol)}};
  } catch (const CapacityError& e) {
    row.status = "capacity";
    row.note = e.what();
    row.value.reset();
  } catch (const BudgetError& e) {
    row.status = "budget";
    row.note = e.what();
    row.value.reset();
  }
  row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

// ---------------------------------------------------------------------------
// Grids

struct ExperimentSpec {
  std::vector<std::string> benchmarks;
  std::vector<int> horizons;
  std::vector<std::string> methods;
  SolverConfig config;
  std::string out_dir;
  int repetitions = 1;
  bool record_times = false;  // wall times make CSVs run-dependent
  double cap = kEnumCap;

  void check() const {
    for (const auto& m : methods)
      if (!valid_method(m)) throw DomainError("unknown method '" + m + "'");
    for (int h : horizons)
      if (h < 1) throw DomainError("horizons must be >= 1");
    if (repetitions < 1) throw DomainError("repetitions must be >= 1");
    config.check();
  }
};

inline ExperimentSpec table1_suite(std::uint64_t seed) {
  ExperimentSpec s;
  s.benchmarks = benchmark_names();
  s.horizons = {1, 2, 3, 6};
  s.methods = method_names();
  s.config.seed = seed;
  return s;
}

using ResultTable = std::vector<ResultRow>;

inline std::vector<ResultTable> run_experiments(const ExperimentSpec& spec,
                                                const std::function<void(const ResultRow&)>& progress = {}) {
  spec.check();
  std::vector<ResultTable> out;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    ResultTable t;
    for (const auto& b : spec.benchmarks)
      for (int h : spec.horizons) {
        Game g = make_benchmark(b, h);
        for (const auto& m : spec.methods) {
          t.push_back(run_method(g, b, m, spec.config, spec.cap));
          if (progress) progress(t.back());
        }
      }
    out.push_back(std::move(t));
  }
  return out;
}

inline std::string csv_number(double x, int prec = 6) {
  if (std::abs(x) < 0.5 * std::pow(10.0, -prec)) x = 0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

inline const char* kCsvHeader = "benchmark,horizon,method,value,time_s,vf_size,exploitability,status";

inline std::string to_csv(const ResultTable& t, bool record_times) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : t) {
    bool dash = r.status == "capacity" || (r.status == "budget" && !r.value);
    os << r.benchmark << ',' << r.horizon << ',' << r.method << ',';
    if (dash) {
      os << "---,---,---,---," << r.status << '\n';
      continue;
    }
    os << csv_number(*r.value) << ',' << (record_times ? csv_number(r.time_s, 3) : "na") << ','
       << (r.vf_size ? std::to_string(*r.vf_size) : "na") << ','
       << (r.exploitability ? csv_number(*r.exploitability, 9) : "na") << ',' << r.status << '\n';
  }
  return os.str();
}

inline std::string policy_file_name(const ResultRow& r) {
  return r.benchmark + "_l" + std::to_string(r.horizon) + "_" + r.method + ".json";
}

// Writes results.csv (results_<k>.csv per repetition when repeating),
// timings.csv, policies/ and manifest.json under spec.out_dir.
inline void write_experiment(const ExperimentSpec& spec, const std::vector<ResultTable>& tables) {
  namespace fs = std::filesystem;
  fs::path dir(spec.out_dir);
  fs::create_directories(dir / "policies");
  nlohmann::json rows = nlohmann::json::array();
  std::ofstream tim(dir / "timings.csv");
  tim << "repetition,benchmark,horizon,method,time_s\n";
  for (std::size_t k = 0; k < tables.size(); ++k) {
    std::string name = tables.size() == 1 ? "results.csv" : "results_" + std::to_string(k) + ".csv";
    std::ofstream(dir / name) << to_csv(tables[k], spec.record_times);
    for (const auto& r : tables[k]) {
      tim << k << ',' << r.benchmark << ',' << r.horizon << ',' << r.method << ',' << csv_number(r.time_s, 3) << '\n';
      if (k == 0 && !r.policy.is_null()) std::ofstream(dir / "policies" / policy_file_name(r)) << r.policy.dump(1);
      if (k == 0)
        rows.push_back({{"benchmark", r.benchmark},
                        {"horizon", r.horizon},
                        {"method", r.method},
                        {"status", r.status},
                        {"note", r.note},
                        {"solver", r.manifest}});
    }
  }
  const SolverConfig& c = spec.config;
  nlohmann::json man = {{"benchmarks", spec.benchmarks},
                        {"horizons", spec.horizons},
                        {"methods", spec.methods},
                        {"repetitions", spec.repetitions},
                        {"enumeration_cap", spec.cap},
                        {"milp_backend", "highs"},
                        {"config",
                         {{"seed", c.seed},
                          {"epsilon_expand", c.epsilon_expand},
                          {"epsilon_prune", c.epsilon_prune},
                          {"max_credible_sets", c.max_credible_sets},
                          {"max_occupancy", c.max_occupancy},
                          {"max_iterations", c.max_iterations},
                          {"time_budget_s", c.time_budget}}},
                        {"rows", rows}};
  std::ofstream(dir / "manifest.json") << man.dump(1);
}

// Recomputes a row's exploitability from its stored policy file.
inline double replay_exploitability(const nlohmann::json& policy_file) {
  Game g = make_benchmark(policy_file.at("benchmark").get<std::string>(), policy_file.at("horizon").get<int>());
  HistorySpace sp(g);
  LeaderPolicy p = leader_policy_from_json(sp, policy_file.at("leader"));
  return measured_exploitability(sp, p, policy_file.at("claimed_value").get<double>());
}

}  // namespace sse
