#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "digs/error.hpp"
#include "digs/harness.hpp"

namespace digs {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json small_experiment() {
  return {{"id", "small"},
          {"target", "mog4-unbalanced"},
          {"samplers",
           {{{"type", "mala"}, {"step_size", 0.01}, {"steps_per_sample", 2}},
            {{"type", "digs"},
             {"schedule", {{"type", "explicit"}, {"levels", {{1.0, 1.0}}}}},
             {"sweeps", 2},
             {"denoise_steps", 2},
             {"denoiser", {{"type", "mala"}, {"step_size", 0.01}}}}}},
          {"n_samples", 40},
          {"seeds", {0, 1}},
          {"threads", 2},
          {"metrics", {{"mmd", {{"reference_size", 200}}}, {"mae", true}, {"mode_coverage", {{"radius_sigma", 3}}}}}};
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("digs_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config validation

TEST(ExperimentConfig, Valid) {
  const auto c = experiment_from_json(small_experiment());
  EXPECT_EQ(c.samplers.size(), 2u);
  EXPECT_EQ(c.samplers[0].label, "mala");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1}));
}

TEST(ExperimentConfig, RejectsBadConfigs) {
  auto expect_reject = [](const std::function<void(json&)>& edit) {
    auto j = small_experiment();
    edit(j);
    EXPECT_THROW(experiment_from_json(j), ConfigError) << j.dump();
  };
  expect_reject([](json& j) { j.erase("target"); });
  expect_reject([](json& j) { j["target"] = "mog7"; });
  expect_reject([](json& j) { j["samplers"] = json::array(); });
  expect_reject([](json& j) { j["samplers"][0]["type"] = "gibbs"; });
  expect_reject([](json& j) { j["samplers"][1]["label"] = "mala"; });
  expect_reject([](json& j) { j["n_samples"] = 0; });
  expect_reject([](json& j) { j["seeds"] = json::array(); });
  expect_reject([](json& j) { j["budget"] = {{"max_queries", 0}}; });
  expect_reject([](json& j) { j["x0"] = "prior"; });
  expect_reject([](json& j) { j["x0"] = {1.0, 2.0, 3.0}; });
  expect_reject([](json& j) { j["tier"] = "huge"; });
  expect_reject([](json& j) { j["metrics"]["predictive_nll"] = true; });
  expect_reject([](json& j) { j["metrics"]["mode_coverage"]["radius_sigma"] = -1; });
  expect_reject([](json& j) { j["samplers"][1]["schedule"]["levels"] = {{1.0, 30.0}}; });
}

TEST(ExperimentConfig, MogMetricsNeedAMogTarget) {
  auto j = small_experiment();
  j["target"] = "bnn-toy";
  EXPECT_THROW(experiment_from_json(j), ConfigError);
}

TEST(ExperimentConfig, EveryRegisteredExperimentResolves) {
  for (const auto& id : registry::ids())
    for (const char* tier : {"desk", "paper"}) EXPECT_NO_THROW(experiment_from_json(registry::experiment(id, tier))) << id;
  EXPECT_THROW(registry::experiment("nope"), ConfigError);
  EXPECT_THROW(registry::experiment("mog40", "huge"), ConfigError);
}

TEST(Registry, SweepGrids) {
  const auto g = registry::sweep_grids("mog9-kernel");
  EXPECT_EQ(g.at("alpha").front(), 0.01);
  EXPECT_EQ(g.at("sigma").back(), 20.0);
  EXPECT_EQ(registry::sweep_grids("mog9-vp").at("T"), (std::vector<double>{2, 3, 4, 5}));
}

TEST(Registry, DeskBudgetsMatchTheDocumentedScale) {
  const auto desk = experiment_from_json(registry::experiment("mog40", "desk"));
  for (const auto& s : desk.samplers) {
    const double per_sample = static_cast<double>(expected_queries(s, 1000)) / 1000.0;
    EXPECT_GE(per_sample, 990.0) << s.label;
    EXPECT_LE(per_sample, 1000.01) << s.label;
  }
  EXPECT_EQ(desk.n_samples * 10, experiment_from_json(registry::experiment("mog40", "paper")).n_samples);
}

// Overrides

TEST(Overrides, Parse) {
  EXPECT_EQ(parse_override("alpha=0.5"), (std::pair<std::string, json>{"alpha", 0.5}));
  EXPECT_EQ(parse_override("target=mog9"), (std::pair<std::string, json>{"target", "mog9"}));
  EXPECT_EQ(parse_override("a.b=[1,2]").second, json({1, 2}));
  EXPECT_THROW(parse_override("novalue"), ConfigError);
  EXPECT_THROW(parse_override("=3"), ConfigError);
}

TEST(Overrides, DottedPathsByIndexAndLabel) {
  auto j = small_experiment();
  apply_override(j, "samplers.0.step_size", 0.2);
  apply_override(j, "samplers.digs.sweeps", 7);
  apply_override(j, "n_samples", 5);
  EXPECT_EQ(j["samplers"][0]["step_size"], 0.2);
  EXPECT_EQ(j["samplers"][1]["sweeps"], 7);
  EXPECT_EQ(j["n_samples"], 5);
  EXPECT_THROW(apply_override(j, "samplers.hmc.sweeps", 3), ConfigError);
  EXPECT_THROW(apply_override(j, "samplers.5.sweeps", 3), ConfigError);
}

TEST(Overrides, Aliases) {
  auto j = small_experiment();
  apply_override(j, "alpha", 0.3);
  EXPECT_EQ(j["samplers"][1]["schedule"]["levels"][0][0], 0.3);
  apply_override(j, "sigma", 8.0);
  EXPECT_EQ(j["samplers"][1]["schedule"]["levels"][0][1], 8.0);
  EXPECT_EQ(j["samplers"][1]["sweep_mode"], true);
  apply_override(j, "sweeps", 4);
  EXPECT_EQ(j["samplers"][1]["sweeps"], 4);
  apply_override(j, "seed", 9);
  EXPECT_EQ(j["seeds"], json({9}));
  apply_override(j, "max_queries", 100);
  EXPECT_EQ(j["budget"]["max_queries"], 100);
  EXPECT_THROW(apply_override(j, "T", 3), ConfigError);
  EXPECT_THROW(apply_override(j, "alpha", "big"), ConfigError);

  auto vp = registry::experiment("mog9-vp");
  apply_override(vp, "T", 4);
  EXPECT_EQ(experiment_from_json(vp).samplers[0].label, "digs");
  EXPECT_EQ(vp["samplers"][0]["schedule"]["T"], 4);
}

// Runs and reports

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { report_ = new RunReport(run_experiment(experiment_from_json(small_experiment()))); }
  static void TearDownTestSuite() { delete report_; }
  static RunReport* report_;
};
RunReport* SmallRun::report_ = nullptr;

TEST_F(SmallRun, CellsAndCounts) {
  const auto& r = *report_;
  EXPECT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.sampler_labels(), (std::vector<std::string>{"mala", "digs"}));
  for (const auto& c : r.cells) {
    EXPECT_TRUE(c.counts_match) << c.sampler;
    EXPECT_EQ(c.run.counts.queries, c.expected_queries);
    EXPECT_EQ(c.run.samples.size(), 40u);
    EXPECT_TRUE(c.metrics.count("mmd"));
    EXPECT_TRUE(c.metrics.count("mae_percent"));
    EXPECT_TRUE(c.metrics.count("mode_coverage"));
    EXPECT_EQ(c.mode_mass.size(), 4u);
  }
  EXPECT_FALSE(r.truncated);
}

TEST_F(SmallRun, SummaryOverSeeds) {
  const auto v = report_->metric_values("mala", "mmd");
  ASSERT_EQ(v.size(), 2u);
  const auto s = report_->summary("mala", "mmd");
  EXPECT_EQ(s.n, 2);
  EXPECT_NEAR(s.mean, (v[0] + v[1]) / 2, 1e-15);
  EXPECT_NEAR(s.stderr_, std::abs(v[0] - v[1]) / 2, 1e-12);
}

TEST_F(SmallRun, DeterministicAcrossThreadCounts) {
  auto j = small_experiment();
  j["threads"] = 1;
  const auto serial = run_experiment(experiment_from_json(j));
  auto a = report_to_json(serial, false), b = report_to_json(*report_, false);
  a["config"].erase("threads");
  b["config"].erase("threads");
  EXPECT_EQ(a, b);
  EXPECT_EQ(samples_csv(serial), samples_csv(*report_));
}

TEST_F(SmallRun, SamplesCsvFormat) {
  const auto csv = samples_csv(*report_);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sampler,seed,index,x0,x1");
  int rows = 0;
  const std::regex number(R"(-?\d(\.\d+)?(e[+-]\d+)?|-?0)");
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    ASSERT_EQ(fields.size(), 5u) << line;
    for (int k = 3; k < 5; ++k) {
      const double v = std::stod(fields[static_cast<std::size_t>(k)]);
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      EXPECT_EQ(fields[static_cast<std::size_t>(k)], buf);
    }
  }
  EXPECT_EQ(rows, 160);
}

TEST_F(SmallRun, ReportJsonFields) {
  const auto j = report_to_json(*report_);
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["experiment"], "small");
  EXPECT_EQ(j["seeds"], json({0, 1}));
  EXPECT_EQ(j["results"].size(), 4u);
  EXPECT_TRUE(j["results"][0].contains("wall_seconds"));
  EXPECT_FALSE(report_to_json(*report_, false)["results"][0].contains("wall_seconds"));
  EXPECT_EQ(j["summary"]["digs"]["metrics"]["mmd"]["n"], 2);
}

TEST_F(SmallRun, OutputsOnDisk) {
  const auto dir = temp_dir("outputs");
  write_outputs(*report_, dir);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "samples.csv"));
  EXPECT_TRUE(fs::exists(dir / "scatter.svg"));
  EXPECT_FALSE(fs::exists(dir / "marginals.csv"));
  const auto svg = read_file(dir / "scatter.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("digs"), std::string::npos);
  EXPECT_EQ(json::parse(read_file(dir / "report.json"))["experiment"], "small");
}

TEST_F(SmallRun, ReportMatchesPublishedSchema) {
  if (std::system("python3 -c 'import jsonschema' > /dev/null 2>&1") != 0) GTEST_SKIP() << "python3 jsonschema unavailable";
  const auto dir = temp_dir("schema");
  write_outputs(*report_, dir);
  const std::string cmd = "python3 -c \"import json,jsonschema; jsonschema.validate(json.load(open('" +
                          (dir / "report.json").string() + "')), json.load(open('" DIGS_SOURCE_DIR
                          "/schema/report.schema.json')))\"";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

TEST(Reports, HigherDimensionalTargetsWriteMarginals) {
  json j = {{"id", "nd"},
            {"target", {{"preset", "standard_normal"}, {"dim", 3}}},
            {"samplers", {{{"type", "mala"}, {"step_size", 0.3}}}},
            {"n_samples", 50},
            {"metrics", {{"moments", true}}}};
  const auto r = run_experiment(experiment_from_json(j));
  const auto dir = temp_dir("marginals");
  write_outputs(r, dir);
  EXPECT_FALSE(fs::exists(dir / "scatter.svg"));
  const auto csv = read_file(dir / "marginals.csv");
  EXPECT_EQ(csv.rfind("sampler,seed,dim,bin_lo,bin_hi,density\n", 0), 0u);
  EXPECT_TRUE(r.cells[0].metrics.count("mean_abs_max"));
}

TEST(Reports, TruncationIsFlagged) {
  auto j = small_experiment();
  j["budget"] = {{"max_queries", 30}};
  const auto r = run_experiment(experiment_from_json(j));
  EXPECT_TRUE(r.truncated);
  for (const auto& c : r.cells) {
    EXPECT_TRUE(c.run.truncated);
    EXPECT_LT(c.run.samples.size(), 40u);
    // Kept samples fit the budget; the sample that crossed it was dropped.
    const auto spec = experiment_from_json(small_experiment()).samplers;
    const auto& s = c.sampler == "mala" ? spec[0] : spec[1];
    EXPECT_LE(expected_queries(s, static_cast<int>(c.run.samples.size())), 30u);
    EXPECT_GT(c.run.counts.queries, 30u);
  }
  EXPECT_TRUE(report_to_json(r)["truncated"]);
}

TEST(Sweeps, SummaryCsv) {
  auto j = small_experiment();
  j["seeds"] = {3};
  j["samplers"] = json::array({j["samplers"][1]});
  const auto res = sweep(j, "alpha", {0.5, 1.0});
  ASSERT_EQ(res.reports.size(), 2u);
  EXPECT_EQ(primary_metric(res.reports[0]), "mmd");
  const auto csv = sweep_summary_csv(res);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "value,sampler,metric,mean,stderr,n");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0.5,digs,mmd,", 0), 0u) << line;
  const auto dir = temp_dir("sweep");
  write_sweep_outputs(res, dir);
  EXPECT_TRUE(fs::exists(dir / "sweep_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "alpha=1.0" / "report.json"));
}

TEST(Sweeps, InvalidPointRejectedBeforeAnyWork) {
  auto j = small_experiment();
  EXPECT_THROW(sweep(j, "alpha", {0.5, -1.0}), ConfigError);
  EXPECT_THROW(sweep(j, "alpha", {}), ConfigError);
  EXPECT_THROW(sweep(j, "no_such_param.x", {1}), ConfigError);
}

// CLI

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DIGS_BENCH_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = temp_dir("cli");
  const auto cfg = dir / "small.json";
  std::ofstream(cfg) << small_experiment().dump();
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("run --config " + cfg.string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override max_queries=30" + out), 3);
  EXPECT_EQ(run_cli("run --experiment nope" + out), 2);
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override alpha=-1" + out), 2);
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override bogus" + out), 2);
  EXPECT_EQ(run_cli("run --tier gigantic --experiment mog9-vp" + out), 2);
  EXPECT_EQ(run_cli("sweep --config " + cfg.string() + " --param alpha --values 0.5,1" + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep_summary.csv"));
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("targets --out " + (dir / "targets").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "targets" / "mog40.json"));
}

}  // namespace
}  // namespace digs
