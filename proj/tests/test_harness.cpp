#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sgld/errors.hpp"
#include "sgld/harness/config.hpp"
#include "sgld/harness/experiments.hpp"
#include "sgld/harness/result.hpp"

using namespace sgld;
using namespace sgld::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sgld_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentResult sample_result() {
  ExperimentResult r;
  r.experiment = "gen-gap";
  r.config = ExperimentConfig{}.to_json();
  r.master_seed = 17;
  r.rows.push_back({"n=16", "gap_abs", 16, 0.25, 0.2, 0.3, 0.4, 99, "rademacher::gen_gap_estimate"});
  r.rows.push_back({"n=32", "gap_abs", 32, std::numeric_limits<double>::quiet_NaN(),
                    -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    std::nullopt, 100, "rademacher::gen_gap_estimate"});
  r.rows.push_back({"fit", "slope, \"quoted\"", 0, -0.5, -0.6, -0.4, std::nullopt, 17, "statistics::least_squares"});
  r.verdicts.push_back({"gap-slope", true, 0.1, "slope -0.5"});
  r.errors.push_back({"n=64", "numeric error: something"});
  r.extra = {{"note", "x"}};
  r.wall_clock_s = 1.5;
  return r;
}

}  // namespace

TEST(Harness, EmptyResultGivesHeaderOnlyCsv) {
  ExperimentResult r;
  r.experiment = "bounds-report";
  EXPECT_EQ(to_csv(r), std::string(kCsvHeader) + "\n");
  const auto dir = scratch("empty");
  const auto files = emit(r, EmitFormat::Csv, dir);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(slurp(files[0]), std::string(kCsvHeader) + "\n");
}

TEST(Harness, JsonRoundTripIsExact) {
  const auto r = sample_result();
  const auto back = ExperimentResult::from_json(nlohmann::json::parse(r.to_json().dump()));
  EXPECT_TRUE(back == r);
  const auto dir = scratch("roundtrip");
  const auto files = emit(r, EmitFormat::Json, dir);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_TRUE(read_result(files[0]) == r);
}

TEST(Harness, JsonCarriesProvenance) {
  const auto j = sample_result().to_json();
  EXPECT_EQ(j.at("provenance").at("master_seed"), 17u);
  EXPECT_EQ(j.at("provenance").at("rows").size(), 3u);
  EXPECT_EQ(j.at("provenance").at("rows")[0].at("module"), "rademacher");
}

TEST(Harness, PlotDataHasFiveColumns) {
  const auto dir = scratch("plot");
  const auto files = emit(sample_result(), EmitFormat::PlotData, dir);
  ASSERT_FALSE(files.empty());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,ci_lo,ci_hi,overlay");
    while (std::getline(in, line)) {
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4) << line;
    }
  }
}

TEST(Harness, CsvQuotesAndSeeds) {
  const std::string csv = to_csv(sample_result());
  EXPECT_NE(csv.find("\"slope, \"\"quoted\"\"\""), std::string::npos);
  EXPECT_NE(csv.find(",99,rademacher::gen_gap_estimate"), std::string::npos);
  EXPECT_NE(csv.find("nan"), std::string::npos);
}

TEST(Harness, EmitReportsPathOnFailure) {
  const auto dir = scratch("blocked");
  const fs::path blocker = dir / "file";
  std::ofstream(blocker) << "x";
  try {
    emit(sample_result(), EmitFormat::Csv, blocker / "sub");
    FAIL() << "expected an I/O error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("file"), std::string::npos) << e.what();
  }
}

TEST(Harness, ConfigValidation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_values = {32, 16};
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.h_values.clear();
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.replicas = 0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Harness, ConfigJsonRoundTripAndStrictKeys) {
  ExperimentConfig c;
  c.experiment = ExperimentId::SaConvergence;
  c.model.family = "ripple";
  c.seed = 123;
  c.x0 = {2.0};
  EXPECT_EQ(ExperimentConfig::from_json(c.to_json()), c);

  auto j = c.to_json();
  j["unknown_key"] = 1;
  EXPECT_THROW(ExperimentConfig::from_json(j), UsageError);
  j = c.to_json();
  j.erase("schema_version");
  EXPECT_THROW(ExperimentConfig::from_json(j), UsageError);
  j = c.to_json();
  j["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(ExperimentConfig::from_json(j).validate(), UsageError);
}

TEST(Harness, ConfigDigestIgnoresOutputLocation) {
  ExperimentConfig a, b;
  b.output_dir = "elsewhere";
  b.policy = ExecutionPolicy::Serial;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.seed = 1;
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(Harness, BoundsReportIsDeterministicAcrossPolicies) {
  ExperimentConfig c;
  c.experiment = ExperimentId::BoundsReport;
  c.t_values = {5.0, 20.0};
  const auto a = run_experiment(c);
  c.policy = ExecutionPolicy::Serial;
  const auto b = run_experiment(c);
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_TRUE(a.errors.empty());
  EXPECT_TRUE(a.verdicts.empty());
  for (const auto& row : a.rows) EXPECT_EQ(row.seed, c.seed);
}

TEST(Harness, RunProcessEmitsMomentsWithOverlay) {
  ExperimentConfig c;
  c.experiment = ExperimentId::Run;
  c.process = "sgld";
  c.replicas = 64;
  c.t = 2.0;
  c.t_values = {1.0, 2.0};
  TrajectoryEnsemble ens;
  const auto r = run_process(c, {}, &ens);
  EXPECT_EQ(ens.replicas, 64u);
  std::size_t moments = 0;
  for (const auto& row : r.rows)
    if (row.metric == "second_moment") {
      ++moments;
      ASSERT_TRUE(row.overlay.has_value());
      EXPECT_LE(row.ci_lo, *row.overlay);
    }
  EXPECT_EQ(moments, 2u);
  EXPECT_TRUE(r.extra.contains("trajectory_summary"));
}

TEST(Harness, GridPointErrorsDoNotStopTheRun) {
  ExperimentConfig c;
  c.experiment = ExperimentId::RademacherStudy;
  c.model.d = 3;  // grid optimizer cannot handle d = 3
  c.K = 4;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.errors.size(), c.r_values.size());
}

TEST(Harness, ResumeReusesPartialResults) {
  ExperimentConfig c;
  c.experiment = ExperimentId::GenGap;
  c.model.family = "ripple";
  c.n_values = {8, 16};
  c.draws = 3;
  c.replicas = 4;
  c.t = 0.5;
  const auto dir = scratch("partial");
  const auto first = run_experiment(c, dir);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 2u);
  const auto second = run_experiment(c, dir);
  EXPECT_EQ(to_csv(first), to_csv(second));
  c.seed = 5;
  const auto third = run_experiment(c, dir);
  EXPECT_NE(to_csv(first), to_csv(third));
}

TEST(Harness, NegativeControlFailsDissipativity) {
  ExperimentConfig c;
  c.experiment = ExperimentId::LemmaSuite;
  c.negative_control = true;
  c.K = 20;
  const auto r = lemma_suite(c);
  bool saw_regularity = false;
  for (const auto& v : r.verdicts)
    if (v.name.rfind("regularity/", 0) == 0) {
      saw_regularity = true;
      EXPECT_FALSE(v.pass) << v.name;
    }
  EXPECT_TRUE(saw_regularity);
  EXPECT_FALSE(r.all_pass());
}

TEST(Harness, OutputRootEnvironment) {
  ExperimentConfig c;
  c.output_dir = "rel";
  setenv(kOutputRootEnv, "/tmp/sgld_root", 1);
  EXPECT_EQ(resolve_output_dir(c), fs::path("/tmp/sgld_root/rel"));
  c.output_dir = "/abs";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs"));
  unsetenv(kOutputRootEnv);
}
