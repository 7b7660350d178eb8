// Acceptance run: one PASS/FAIL line per check, nonzero exit on any FAIL.
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sse/experiment.hpp"
#include "support.hpp"

#ifndef SSE_CLI_PATH
#define SSE_CLI_PATH "sse"
#endif

using namespace sse;

namespace {

struct Check {
  Check(int i, std::string n) : id(i), name(std::move(n)) {}

  int id;
  std::string name;
  bool pass = true;
  std::vector<std::string> issues;

  void fail(const std::string& why) {
    pass = false;
    if (issues.size() < 8) issues.push_back(why);
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

using Table = std::map<std::tuple<std::string, int, std::string>, ResultRow>;

const std::vector<int> kHorizons{1, 2, 3, 6};

// Leader values per benchmark at horizons 1, 2, 3, 6.
const std::map<std::string, std::vector<double>> kGoldenH{
    {"centipede", {1, 1, 2, 4.67}},  {"match", {-1000, -1000, 0, 0}},    {"dec_tiger", {20, 40, 60, 120}},
    {"mabc", {1, 2, 2.99, 5.93}},    {"patrolling", {0, 0, 0, 0}},
};

// Reported value-function sizes of the two PBVI variants.
const std::map<std::string, std::vector<double>> kVfH{
    {"centipede", {2, 4, 4, 9}}, {"match", {2, 3, 4, 7}},      {"dec_tiger", {2, 4, 6, 12}},
    {"mabc", {2, 4, 7, 74}},     {"patrolling", {2, 6, 9, 39}},
};
const std::vector<double> kVfS{2, 3, 4, 7};

const ResultRow* find(const Table& t, const std::string& b, int h, const std::string& m) {
  auto it = t.find({b, h, m});
  return it == t.end() ? nullptr : &it->second;
}

void check_values(Check& c, const Table& t, const std::string& method, double tol, bool match_is_s) {
  for (const auto& [b, vals] : kGoldenH)
    for (std::size_t i = 0; i < kHorizons.size(); ++i) {
      int h = kHorizons[i];
      double want = vals[i];
      if (match_is_s && b == "match" && h >= 3) want = h == 3 ? -1000 : -2000;
      const ResultRow* r = find(t, b, h, method);
      if (!r || !r->value)
        c.fail(b + " l=" + std::to_string(h) + ": no value (" + (r ? r->status : "missing") + ")");
      else if (std::abs(*r->value - want) > tol)
        c.fail(b + " l=" + std::to_string(h) + ": " + fmt(*r->value) + " vs " + fmt(want));
    }
}

Check golden_h(const Table& t) {
  Check c{1, "PBVI-H leader values on the five benchmarks (+-0.02)"};
  check_values(c, t, "H", 0.02, false);
  return c;
}

Check golden_s(const Table& t) {
  Check c{2, "PBVI-S equals H except Match l=3 (-1000) and l=6 (-2000)"};
  check_values(c, t, "S", 0.02, true);
  return c;
}

Check induction(const Table& t) {
  Check c{3, "BI/MY fall short on Centipede and Match at l=3; H policies are unexploitable"};
  for (const std::string m : {"BI", "MY"}) {
    for (auto [b, want] : {std::pair<std::string, double>{"centipede", 1}, {"match", -1000}}) {
      const ResultRow* r = find(t, b, 3, m);
      if (!r || !r->value || std::abs(*r->value - want) > 1e-6)
        c.fail(m + " " + b + ": " + (r && r->value ? fmt(*r->value) : "none") + " vs " + fmt(want));
    }
  }
  for (const std::string b : {"centipede", "match"}) {
    const ResultRow* r = find(t, b, 3, "H");
    if (!r || !r->exploitability || *r->exploitability > 1e-6)
      c.fail("H " + b + " exploitability " + (r && r->exploitability ? fmt(*r->exploitability) : "none"));
  }
  return c;
}

Check small_horizons(const Table& t) {
  Check c{4, "H = S = LP = MILP at l<=2 (1e-6); enumeration refused at l>=3"};
  for (const auto& b : benchmark_names()) {
    for (int h : {1, 2}) {
      Game g = make_benchmark(b, h);
      if (!fits_cap(g, h)) {
        c.fail(b + " l=" + std::to_string(h) + " does not fit the cap");
        continue;
      }
      const ResultRow* ref = find(t, b, h, "H");
      for (const std::string m : {"S", "LP", "MILP"}) {
        const ResultRow* r = find(t, b, h, m);
        if (!ref || !r || !ref->value || !r->value || std::abs(*ref->value - *r->value) > 1e-6)
          c.fail(b + " l=" + std::to_string(h) + " " + m + " differs from H");
      }
    }
    for (int h : {3, 6})
      for (const std::string m : {"LP", "MILP"}) {
        const ResultRow* r = find(t, b, h, m);
        if (!r || r->status != "capacity") c.fail(b + " l=" + std::to_string(h) + " " + m + " was not refused");
      }
  }
  const ResultRow* r = find(t, "centipede", 3, "LP");
  if (!r || r->note.find("2^73") == std::string::npos) c.fail("Centipede l=3 refusal does not report 2^73");
  return c;
}

Check filtering(std::uint64_t seed) {
  Check c{5, "filtering preserves terminal_reward: 200 random Markov policies under 60 s"};
  std::mt19937_64 rng(seed);
  auto t0 = std::chrono::steady_clock::now();
  int done = 0, resampled = 0;
  while (done < 200) {
    fixtures::RandomGameSpec gs;
    gs.nS = std::uniform_int_distribution<int>(2, 4)(rng);
    gs.nAL = std::uniform_int_distribution<int>(2, 3)(rng);
    gs.nAF = std::uniform_int_distribution<int>(2, 3)(rng);
    gs.horizon = std::uniform_int_distribution<int>(2, 4)(rng);
    Game g = fixtures::random_game(rng, gs);
    auto pol = fixtures::random_markov_policy(rng, g);
    try {
      auto [full, filt] = fixtures::filtered_vs_unfiltered(g, pol, double(1 << 14));
      if (full != filt) c.fail("instance " + std::to_string(done) + ": " + fmt(full) + " vs " + fmt(filt));
      ++done;
    } catch (const CapacityError&) {
      ++resampled;
    }
  }
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sec > 60) c.fail("took " + fmt(sec) + " s");
  c.name += " (" + std::to_string(resampled) + " oversized draws resampled, " + fmt(std::round(sec * 10) / 10) + " s)";
  return c;
}

Check backup_oracle(std::uint64_t seed) {
  Check c{6, "backup MILP within 1e-4 of the brute-force oracle on 50 tiny instances"};
  std::mt19937_64 rng(seed);
  int n = 0, members = 0;
  while (n < 50) {
    auto in = fixtures::random_backup_instance(rng);
    if (!in) continue;
    ++n;
    for (int o = 0; o < int(in->c.members.size()); ++o, ++members) {
      auto sol = greedy_backup_milp(in->c, in->ix, o, in->next, *in->sp);
      auto orc = fixtures::backup_oracle(*in, o);
      std::string tag = "instance " + std::to_string(n) + " member " + std::to_string(o) + ": ";
      if (sol.feasible != orc.has_value())
        c.fail(tag + "feasibility " + std::to_string(sol.feasible) + " vs " + std::to_string(orc.has_value()));
      else if (orc && std::abs(sol.qL - *orc) > 1e-4)
        c.fail(tag + fmt(sol.qL) + " vs " + fmt(*orc));
    }
  }
  c.name += " (" + std::to_string(members) + " backups)";
  return c;
}

Check bound_precision(std::uint64_t seed) {
  using Big = boost::multiprecision::cpp_dec_float_50;
  Check c{7, "exploitability bound agrees with 50-digit evaluation (1e-12); sigma=0 gives 0"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> um(0.1, 10), ug(0.05, 0.95), us(0, 1);
  std::uniform_int_distribution<int> ul(1, 50);
  for (int i = 0; i < 20; ++i) {
    double m = um(rng), gm = ug(rng), s = i == 0 ? 0.0 : us(rng);
    int l = ul(rng);
    Big G(gm), L(l);
    Big exact = Big(2) * Big(m) * Big(s) / ((1 - G) * (1 - G)) *
                (1 + L * boost::multiprecision::pow(G, l + 1) - (L + 1) * boost::multiprecision::pow(G, l));
    double got = exploitability_bound(m, gm, l, s);
    double want = exact.convert_to<double>();
    if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want)))
      c.fail("(" + fmt(m) + ", " + fmt(gm) + ", " + std::to_string(l) + ", " + fmt(s) + "): " + fmt(got) + " vs " +
             fmt(want));
  }
  for (int l : {1, 7, 50})
    if (exploitability_bound(3.5, 0.6, l, 0) != 0) c.fail("sigma=0 is not 0 at l=" + std::to_string(l));
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), {}};
}

Check determinism() {
  Check c{8, "bench --suite table1 --seed 7 twice gives byte-identical CSVs"};
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "sse_acceptance_bench";
  fs::remove_all(base);
  std::string out[2];
  for (int k = 0; k < 2; ++k) {
    fs::path dir = base / ("run" + std::to_string(k));
    std::string cmd = std::string("\"") + SSE_CLI_PATH + "\" bench --suite table1 --seed 7 --out \"" + dir.string() +
                      "\" 2>/dev/null";
    int rc = std::system(cmd.c_str());
    if (rc != 0) c.fail("run " + std::to_string(k) + " exited with " + std::to_string(rc));
    out[k] = slurp(dir / "results.csv");
    if (out[k].empty()) c.fail("run " + std::to_string(k) + " wrote no results.csv");
  }
  if (out[0] != out[1]) c.fail("CSVs differ");
  fs::remove_all(base);
  return c;
}

Check vf_sizes(const Table& t) {
  Check c{9, "VF sizes within [1, 4x reported] for H and S"};
  for (const auto& [b, ref] : kVfH)
    for (std::size_t i = 0; i < kHorizons.size(); ++i)
      for (const std::string m : {"H", "S"}) {
        double cap = 4 * (m == "H" ? ref[i] : kVfS[i]);
        const ResultRow* r = find(t, b, kHorizons[i], m);
        std::string tag = b + " l=" + std::to_string(kHorizons[i]) + " " + m;
        if (!r || !r->vf_size)
          c.fail(tag + ": no size");
        else if (*r->vf_size < 1 || double(*r->vf_size) > cap)
          c.fail(tag + ": " + std::to_string(*r->vf_size) + " outside [1, " + fmt(cap) + "]");
      }
  return c;
}

}  // namespace

int main() {
  std::cerr << "running the benchmark grid...\n";
  auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec spec = table1_suite(7);
  auto tables = run_experiments(spec);
  Table t;
  for (auto& r : tables[0]) t[{r.benchmark, r.horizon, r.method}] = r;
  std::cerr << "grid done in "
            << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << " s\n";

  std::vector<Check> checks{golden_h(t),          golden_s(t),     induction(t),  small_horizons(t), filtering(5),
                            backup_oracle(11),    bound_precision(13), determinism(), vf_sizes(t)};
  bool all = true;
  for (const auto& c : checks) {
    std::cout << "criterion " << c.id << ": " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << '\n';
    for (const auto& i : c.issues) std::cout << "    " << i << '\n';
    all = all && c.pass;
  }
  return all ? 0 : 1;
}
