// Command-line front end: solve one game, run a benchmark grid, or evaluate
// the exploitability bound.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sse/experiment.hpp"

namespace {

enum Exit { kOk = 0, kError = 1, kCapacity = 2, kBudget = 3 };

sse::Game load_or_build(const std::string& game, int horizon) {
  if (std::filesystem::exists(game)) {
    sse::Game g = sse::load_game(game);
    if (horizon > 0) g.horizon = horizon;
    return g;
  }
  if (horizon < 1) throw sse::DomainError("--horizon is required when --game names a built-in benchmark");
  return sse::make_benchmark(game, horizon);
}

void add_solver_options(CLI::App* app, sse::SolverConfig& c) {
  app->add_option("--max-occupancy", c.max_occupancy, "occupancy states sampled per credible set");
  app->add_option("--max-sets", c.max_credible_sets, "credible sets kept per stage");
  app->add_option("--epsilon-expand", c.epsilon_expand, "novelty threshold for new samples");
  app->add_option("--max-iterations", c.max_iterations);
  app->add_option("--time-budget", c.time_budget, "PBVI wall-clock budget in seconds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong Stackelberg equilibria of finite-horizon leader-follower stochastic games"};
  app.require_subcommand(1);

  sse::SolverConfig cfg;

  std::string game, method = "H", out;
  int horizon = 0;
  auto* solve = app.add_subcommand("solve", "solve one game with one method");
  solve->add_option("--game", game, "game JSON file or built-in benchmark name")->required();
  solve->add_option("--method", method)->check(CLI::IsMember(sse::method_names()));
  solve->add_option("--horizon", horizon, "planning horizon (overrides the file)");
  solve->add_option("--seed", cfg.seed);
  solve->add_option("--out", out, "directory for result.json, results.csv and policy.json");
  add_solver_options(solve, cfg);

  std::string suite = "table1", bench_out = "bench_out";
  std::vector<std::string> only_bench, only_methods;
  std::vector<int> only_h;
  int reps = 1;
  bool times = false;
  auto* bench = app.add_subcommand("bench", "run a benchmark grid and write CSV + manifest");
  bench->add_option("--suite", suite)->check(CLI::IsMember({"table1"}));
  bench->add_option("--seed", cfg.seed);
  bench->add_option("--out", bench_out);
  bench->add_option("--benchmarks", only_bench, "restrict to these benchmarks");
  bench->add_option("--horizons", only_h, "restrict to these horizons");
  bench->add_option("--methods", only_methods, "restrict to these methods");
  bench->add_option("--repetitions", reps);
  bench->add_flag("--times", times, "write wall times into the CSV (otherwise only timings.csv has them)");
  add_solver_options(bench, cfg);

  double m = 1, gamma = 0.9, sigma = 0;
  int bh = 1;
  auto* bound = app.add_subcommand("bound", "closed-form exploitability bound");
  bound->add_option("--m", m, "reward magnitude bound")->required();
  bound->add_option("--gamma", gamma)->required();
  bound->add_option("--horizon", bh)->required();
  bound->add_option("--sigma", sigma, "covering radius")->required();

  std::string ename, epath;
  int eh = 1;
  auto* exp = app.add_subcommand("export", "write a built-in benchmark as a game file");
  exp->add_option("--name", ename)->required();
  exp->add_option("--horizon", eh)->required();
  exp->add_option("--out", epath)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      sse::Game g = load_or_build(game, horizon);
      auto rep = sse::validate_game(g);
      if (!rep.empty()) {
        for (const auto& e : rep) std::cerr << "invalid game: " << e << '\n';
        return kError;
      }
      std::string name = g.metadata.contains("benchmark") ? g.metadata["benchmark"].get<std::string>() : game;
      sse::ResultRow r = sse::run_method(g, name, method, cfg);
      if (!out.empty()) {
        std::filesystem::create_directories(out);
        std::ofstream(std::filesystem::path(out) / "results.csv") << sse::to_csv({r}, true);
        if (!r.policy.is_null()) std::ofstream(std::filesystem::path(out) / "policy.json") << r.policy.dump(1);
        nlohmann::json res = {{"method", method}, {"horizon", g.horizon}, {"status", r.status},
                              {"note", r.note},   {"time_s", r.time_s},   {"solver", r.manifest}};
        if (r.value) res["value"] = *r.value;
        if (r.exploitability) res["exploitability"] = *r.exploitability;
        if (r.vf_size) res["vf_size"] = *r.vf_size;
        std::ofstream(std::filesystem::path(out) / "result.json") << res.dump(1);
      }
      std::cout << sse::to_csv({r}, true);
      if (r.status == "capacity") {
        std::cerr << r.note << '\n';
        return kCapacity;
      }
      if (r.status == "budget") return kBudget;
      return kOk;
    }
    if (*bench) {
      sse::ExperimentSpec spec = sse::table1_suite(cfg.seed);
      spec.config = cfg;
      if (!only_bench.empty()) spec.benchmarks = only_bench;
      if (!only_h.empty()) spec.horizons = only_h;
      if (!only_methods.empty()) spec.methods = only_methods;
      spec.out_dir = bench_out;
      spec.repetitions = reps;
      spec.record_times = times;
      auto tables = sse::run_experiments(spec, [](const sse::ResultRow& r) {
        std::cerr << r.benchmark << " l=" << r.horizon << ' ' << r.method << ' '
                  << (r.value ? sse::csv_number(*r.value) : std::string("---")) << " (" << r.status << ", "
                  << sse::csv_number(r.time_s, 2) << "s)\n";
      });
      sse::write_experiment(spec, tables);
      for (const auto& t : tables)
        for (const auto& r : t)
          if (r.status == "budget") return kBudget;
      return kOk;
    }
    if (*bound) {
      std::cout.precision(17);
      std::cout << sse::exploitability_bound(m, gamma, bh, sigma) << '\n';
      return kOk;
    }
    if (*exp) {
      sse::save_game(sse::make_benchmark(ename, eh), epath);
      return kOk;
    }
  } catch (const sse::CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const sse::BudgetError& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}
