#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "digs/metrics.hpp"
#include "digs/sampler_config.hpp"

namespace digs {

inline constexpr const char* kReportSchemaVersion = "1.0.0";

struct MetricSpec {
  std::optional<MmdConfig> mmd;
  int reference_size = 10000;
  bool mae = false;
  std::optional<double> coverage_radius_sigma;  // radius in units of the largest sigma_g
  std::optional<HistogramSpec> histogram;
  bool predictive_nll = false;
  bool moments = false;
};

struct ExperimentConfig {
  std::string id;
  std::string tier = "desk";
  std::string description;
  nlohmann::json target;  // resolved target spec (presets expanded)
  std::vector<SamplerSpec> samplers;
  int n_samples = 1000;
  std::vector<std::uint64_t> seeds{0};
  std::optional<std::uint64_t> max_queries;  // per (sampler, seed) cell
  nlohmann::json x0 = "origin";              // "origin" | "prior" | [numbers]
  MetricSpec metrics;
  unsigned threads = 0;  // concurrent cells; 0 picks hardware concurrency
  nlohmann::json source;
};

/// Parses and validates everything up front. Throws ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Sets `key` in an experiment JSON. Accepts dotted paths ("samplers.digs.sweeps",
/// array elements by index or label) and the aliases alpha, sigma (single-level
/// DiGS kernels), T (VP DiGS schedules), sweeps, denoise_steps, seed, max_queries.
void apply_override(nlohmann::json& cfg, const std::string& key, const nlohmann::json& value);

/// "key=value"; the value is parsed as JSON when possible, else kept as a string.
std::pair<std::string, nlohmann::json> parse_override(const std::string& text);

struct CellResult {
  std::string sampler;
  std::string type;
  std::uint64_t seed = 0;
  SamplerRun run;
  std::uint64_t expected_queries = 0;
  bool counts_match = false;
  std::map<std::string, double> metrics;
  std::vector<double> mode_mass;
};

struct MetricSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

struct RunReport {
  std::string experiment;
  std::string tier;
  std::string version;
  nlohmann::json config;
  int dim = 0;
  std::vector<CellResult> cells;
  std::vector<Point> modes;  // mixture means, for plots
  bool truncated = false;

  std::vector<std::string> sampler_labels() const;
  const CellResult& cell(const std::string& sampler, std::uint64_t seed) const;
  std::vector<double> metric_values(const std::string& sampler, const std::string& metric) const;
  MetricSummary summary(const std::string& sampler, const std::string& metric) const;
  /// Mean benchmark queries per kept sample over seeds.
  double queries_per_sample(const std::string& sampler) const;
};

RunReport run_experiment(const ExperimentConfig& cfg);

/// `include_wall_time = false` drops the only non-deterministic fields.
nlohmann::json report_to_json(const RunReport& report, bool include_wall_time = true);

/// report.json, samples.csv and either scatter.svg (2D) or marginals.csv.
void write_outputs(const RunReport& report, const std::filesystem::path& dir);

/// Samples as CSV: header "sampler,seed,index,x0,...", 17 significant digits, LF.
std::string samples_csv(const RunReport& report);
std::string scatter_svg(const RunReport& report);
std::string marginals_csv(const RunReport& report, int bins = 40);

struct SweepResult {
  std::string parameter;
  std::vector<nlohmann::json> values;
  std::vector<RunReport> reports;
};

SweepResult sweep(const nlohmann::json& base, const std::string& parameter, const std::vector<nlohmann::json>& values);

/// Headline metric of a report: mmd when computed, else predictive_nll.
std::string primary_metric(const RunReport& report);

/// value,sampler,metric,mean,stderr,n
std::string sweep_summary_csv(const SweepResult& result);
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

namespace registry {

std::vector<std::string> ids();
std::string description(const std::string& id);
/// Experiment JSON for a tier ("desk" | "paper"). Throws ConfigError.
nlohmann::json experiment(const std::string& id, const std::string& tier = "desk");
/// Named sweep grids ("alpha", "sigma", "T", "sweeps") registered for an experiment.
std::map<std::string, std::vector<double>> sweep_grids(const std::string& id);

}  // namespace registry

}  // namespace digs
