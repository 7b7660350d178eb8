#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "sse/experiment.hpp"

using namespace sse;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Experiment, CsvHeaderAndRows) {
  ResultRow ok;
  ok.benchmark = "match";
  ok.horizon = 3;
  ok.method = "H";
  ok.value = -0.0;
  ok.vf_size = 4;
  ok.exploitability = 0;
  ResultRow cap = ok;
  cap.method = "LP";
  cap.status = "capacity";
  cap.value.reset();
  std::string csv = to_csv({ok, cap}, false);
  EXPECT_EQ(csv,
            "benchmark,horizon,method,value,time_s,vf_size,exploitability,status\n"
            "match,3,H,0.000000,na,4,0.000000000,ok\n"
            "match,3,LP,---,---,---,---,capacity\n");
}

TEST(Experiment, EmptyMethodListGivesHeaderOnly) {
  ExperimentSpec spec = table1_suite(1);
  spec.methods.clear();
  auto tables = run_experiments(spec);
  ASSERT_EQ(tables.size(), 1u);
  EXPECT_EQ(to_csv(tables[0], false), std::string(kCsvHeader) + "\n");
}

TEST(Experiment, InvalidSpecIsRejected) {
  ExperimentSpec spec = table1_suite(1);
  spec.methods = {"H", "XYZ"};
  EXPECT_THROW(spec.check(), DomainError);
  spec = table1_suite(1);
  spec.horizons = {0};
  EXPECT_THROW(spec.check(), DomainError);
  EXPECT_THROW(run_method(make_match(1), "match", "nope", {}), DomainError);
}

TEST(Experiment, CapacityBecomesAMarkedRow) {
  auto r = run_method(make_centipede(3), "centipede", "MILP", {});
  EXPECT_EQ(r.status, "capacity");
  EXPECT_FALSE(r.value.has_value());
  EXPECT_NE(r.note.find("2^73"), std::string::npos);
}

TEST(Experiment, PolicyFilesReplay) {
  for (const std::string m : {"H", "S", "BI", "LP"}) {
    auto r = run_method(make_match(2), "match", m, {});
    ASSERT_EQ(r.status, "ok") << m;
    auto j = nlohmann::json::parse(r.policy.dump());
    EXPECT_NEAR(replay_exploitability(j), *r.exploitability, 1e-9) << m;
  }
}

TEST(Experiment, LeaderPolicyJsonRoundTrip) {
  Game g = make_match(3);
  HistorySpace sp(g);
  auto r = solve_sse(g, {}, sp);
  auto j = leader_policy_to_json(sp, r.policy.leader);
  HistorySpace fresh(g);
  auto back = leader_policy_from_json(fresh, j);
  EXPECT_NEAR(follower_best_response(fresh, back).vL, follower_best_response(sp, r.policy.leader).vL, 1e-12);
  j["stages"][0] = {{"0,1", {1.0, 0.0}}};
  EXPECT_THROW(leader_policy_from_json(fresh, j), ParseError);
}

TEST(Experiment, WritesArtifacts) {
  ExperimentSpec spec = table1_suite(4);
  spec.benchmarks = {"dec_tiger"};
  spec.horizons = {1, 2};
  spec.methods = {"H", "BI"};
  spec.out_dir = (std::filesystem::temp_directory_path() / "sse_experiment_test").string();
  std::filesystem::remove_all(spec.out_dir);
  auto tables = run_experiments(spec);
  write_experiment(spec, tables);
  std::filesystem::path d(spec.out_dir);
  EXPECT_EQ(slurp(d / "results.csv"), to_csv(tables[0], false));
  EXPECT_TRUE(std::filesystem::exists(d / "timings.csv"));
  EXPECT_TRUE(std::filesystem::exists(d / "policies" / "dec_tiger_l2_H.json"));
  auto man = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(man["config"]["seed"], 4);
  EXPECT_EQ(man["rows"].size(), 4u);
  std::filesystem::remove_all(spec.out_dir);
}

TEST(Experiment, CsvIsDeterministic) {
  ExperimentSpec spec = table1_suite(7);
  spec.benchmarks = {"mabc", "match"};
  spec.horizons = {2, 3};
  auto a = run_experiments(spec), b = run_experiments(spec);
  EXPECT_EQ(to_csv(a[0], false), to_csv(b[0], false));
}
