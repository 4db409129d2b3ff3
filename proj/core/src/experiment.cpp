#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "digs/error.hpp"
#include "digs/harness.hpp"
#include "digs/target_factory.hpp"

namespace digs {

using nlohmann::json;

namespace {

constexpr std::uint64_t kReferenceStream = 0x7265666572656e63;  // "referenc"
constexpr std::uint64_t kPriorStream = 0x7072696f72;             // "prior"

json resolve_target(const json& t) {
  if (t.is_string()) return presets::by_name(t.get<std::string>());
  if (t.is_object() && t.contains("preset")) {
    const auto name = t.at("preset").get<std::string>();
    if (name == "mog40" && t.contains("seed")) return presets::mog40(t.at("seed").get<std::uint64_t>());
    if (name == "standard_normal") return presets::standard_normal(t.value("dim", 1));
    return presets::by_name(name);
  }
  return t;
}

HistogramSpec histogram_from_json(const json& j) {
  HistogramSpec h;
  h.bins = j.at("bins").get<std::vector<int>>();
  for (const auto& r : j.at("range")) h.range.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
  h.pseudocount = j.value("pseudocount", h.pseudocount);
  return h;
}

MetricSpec metrics_from_json(const json& j) {
  MetricSpec m;
  if (j.contains("mmd")) {
    m.mmd = mmd_config_from_json(j.at("mmd"));
    m.reference_size = j.at("mmd").value("reference_size", m.reference_size);
    if (m.reference_size < 2) throw ConfigError("metrics.mmd.reference_size must be at least 2");
  }
  m.mae = j.value("mae", false);
  if (j.contains("mode_coverage")) {
    m.coverage_radius_sigma = j.at("mode_coverage").at("radius_sigma").get<double>();
    if (!(*m.coverage_radius_sigma > 0.0)) throw ConfigError("metrics.mode_coverage.radius_sigma must be positive");
  }
  if (j.contains("histogram")) m.histogram = histogram_from_json(j.at("histogram"));
  m.predictive_nll = j.value("predictive_nll", false);
  m.moments = j.value("moments", false);
  return m;
}

bool is_index(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::vector<std::string> split_path(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

json& child(json& node, const std::string& part, const std::string& key) {
  if (node.is_array()) {
    if (is_index(part)) {
      const auto i = std::stoul(part);
      if (i < node.size()) return node[i];
    }
    for (auto& el : node)
      if (el.is_object() && el.value("label", el.value("type", std::string())) == part) return el;
  } else if (node.is_object() && node.contains(part)) {
    return node[part];
  }
  throw ConfigError("override: cannot resolve \"" + key + "\" at \"" + part + "\"");
}

void set_digs_kernel(json& cfg, int component, const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError("override: " + key + " expects a number");
  bool any = false;
  for (auto& s : cfg.at("samplers")) {
    if (s.value("type", std::string()) != "digs" || !s.contains("schedule")) continue;
    auto& sched = s.at("schedule");
    if (sched.value("type", std::string("explicit")) != "explicit" || sched.at("levels").size() != 1) continue;
    sched["levels"][0][static_cast<std::size_t>(component)] = value;
    const double v = value.get<double>();
    if (v > 1.0 || (component == 0 && v <= 0.0)) s["sweep_mode"] = true;
    any = true;
  }
  if (!any) throw ConfigError("override: " + key + " needs a single-level DiGS sampler");
}

void set_digs_field(json& cfg, const std::string& field, const json& value, const std::string& key) {
  bool any = false;
  for (auto& s : cfg.at("samplers")) {
    if (s.value("type", std::string()) != "digs") continue;
    if (field == "T") {
      if (!s.contains("schedule") || s.at("schedule").value("type", std::string()) != "vp_linear") continue;
      s["schedule"]["T"] = value;
    } else {
      s[field] = value;
    }
    any = true;
  }
  if (!any) throw ConfigError("override: " + key + " matches no DiGS sampler");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("experiment: expected an object");
    ExperimentConfig c;
    c.source = j;
    c.id = j.value("id", std::string("custom"));
    c.tier = j.value("tier", std::string("desk"));
    if (c.tier != "desk" && c.tier != "paper") throw ConfigError("experiment: tier must be desk or paper");
    c.description = j.value("description", std::string());
    if (!j.contains("target")) throw ConfigError("experiment: missing \"target\"");
    c.target = resolve_target(j.at("target"));
    make_target(c.target);  // resolve now so bad specs fail before any work
    if (!j.contains("samplers") || !j.at("samplers").is_array() || j.at("samplers").empty())
      throw ConfigError("experiment: \"samplers\" must be a non-empty array");
    for (const auto& s : j.at("samplers")) {
      auto spec = sampler_from_json(s);
      if (spec.label.empty()) spec.label = sampler_type(spec.config);
      for (const auto& other : c.samplers)
        if (other.label == spec.label) throw ConfigError("experiment: duplicate sampler label \"" + spec.label + "\"");
      c.samplers.push_back(std::move(spec));
    }
    c.n_samples = j.value("n_samples", c.n_samples);
    if (c.n_samples < 1) throw ConfigError("experiment: n_samples must be positive");
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw ConfigError("experiment: at least one seed required");
    if (j.contains("budget") && j.at("budget").contains("max_queries") && !j.at("budget").at("max_queries").is_null()) {
      const auto q = j.at("budget").at("max_queries").get<std::int64_t>();
      if (q <= 0) throw ConfigError("experiment: budget.max_queries must be positive");
      c.max_queries = static_cast<std::uint64_t>(q);
    }
    c.x0 = j.value("x0", json("origin"));
    if (!(c.x0 == "origin" || c.x0 == "prior" || c.x0.is_array()))
      throw ConfigError("experiment: x0 must be \"origin\", \"prior\" or a vector");
    c.metrics = metrics_from_json(j.value("metrics", json::object()));
    c.threads = j.value("threads", 0u);

    const auto bundle = make_target(c.target);
    const int dim = bundle.target->dim();
    if (c.x0 == "prior" && !bundle.bnn) throw ConfigError("experiment: x0 \"prior\" needs a bnn target");
    if (c.x0.is_array() && static_cast<int>(c.x0.size()) != dim)
      throw ConfigError("experiment: x0 dimension does not match the target");
    const bool mog = static_cast<bool>(bundle.mixture);
    if ((c.metrics.mmd || c.metrics.mae || c.metrics.coverage_radius_sigma || c.metrics.histogram) && !mog)
      throw ConfigError("experiment: mmd/mae/mode_coverage/histogram metrics need a mog target");
    if (c.metrics.predictive_nll && !bundle.bnn) throw ConfigError("experiment: predictive_nll needs a bnn target");
    if (c.metrics.histogram) validate(*c.metrics.histogram, dim);
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
}

std::pair<std::string, json> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override: expected key=value, got \"" + text + "\"");
  const auto value = text.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  return {text.substr(0, eq), parsed};
}

void apply_override(json& cfg, const std::string& key, const json& value) {
  try {
    if (key == "alpha") return set_digs_kernel(cfg, 0, value, key);
    if (key == "sigma") return set_digs_kernel(cfg, 1, value, key);
    if (key == "T" || key == "sweeps" || key == "denoise_steps") return set_digs_field(cfg, key, value, key);
    if (key == "seed") {
      cfg["seeds"] = json::array({value});
      return;
    }
    if (key == "max_queries") {
      cfg["budget"]["max_queries"] = value;
      return;
    }
    const auto parts = split_path(key);
    json* node = &cfg;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &child(*node, parts[i], key);
    const auto& last = parts.back();
    if (node->is_object()) {
      (*node)[last] = value;
    } else {
      child(*node, last, key) = value;
    }
  } catch (const json::exception& e) {
    throw ConfigError("override \"" + key + "\": " + e.what());
  }
}

std::vector<std::string> RunReport::sampler_labels() const {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (std::find(out.begin(), out.end(), c.sampler) == out.end()) out.push_back(c.sampler);
  return out;
}

const CellResult& RunReport::cell(const std::string& sampler, std::uint64_t seed) const {
  for (const auto& c : cells)
    if (c.sampler == sampler && c.seed == seed) return c;
  throw ContractViolation("report: no cell for sampler \"" + sampler + "\" and seed " + std::to_string(seed));
}

std::vector<double> RunReport::metric_values(const std::string& sampler, const std::string& metric) const {
  std::vector<double> out;
  for (const auto& c : cells) {
    if (c.sampler != sampler) continue;
    const auto it = c.metrics.find(metric);
    if (it != c.metrics.end()) out.push_back(it->second);
  }
  return out;
}

MetricSummary RunReport::summary(const std::string& sampler, const std::string& metric) const {
  const auto v = metric_values(sampler, metric);
  MetricSummary s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  s.mean = mean_of(v);
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

double RunReport::queries_per_sample(const std::string& sampler) const {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.sampler != sampler || c.run.samples.empty()) continue;
    v.push_back(static_cast<double>(c.run.counts.queries) / static_cast<double>(c.run.samples.size()));
  }
  return mean_of(v);
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto bundle = make_target(cfg.target);
  const int dim = bundle.target->dim();

  RunReport report;
  report.experiment = cfg.id;
  report.tier = cfg.tier;
  report.version = DIGS_VERSION;
  report.config = cfg.source;
  report.config["target"] = cfg.target;
  report.dim = dim;
  if (bundle.mixture) report.modes = bundle.mixture->means();

  struct Job {
    std::size_t sampler;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto seed : cfg.seeds)
    for (std::size_t s = 0; s < cfg.samplers.size(); ++s) jobs.push_back({s, seed});
  report.cells.resize(jobs.size());

  RunBudget budget{cfg.max_queries};
  auto run_cell = [&](std::size_t k) {
    const auto& job = jobs[k];
    const auto& spec = cfg.samplers[job.sampler];
    const auto cell_target = make_target(cfg.target);
    Point x0 = Point::Zero(dim);
    if (cfg.x0 == "prior") {
      Rng prior_rng = Rng(job.seed).split(kPriorStream);
      x0 = sample_bnn_prior(cell_target.bnn->network(), prior_rng);
    } else if (cfg.x0.is_array()) {
      for (int i = 0; i < dim; ++i) x0(i) = cfg.x0.at(static_cast<std::size_t>(i)).get<double>();
    }
    CellResult& cell = report.cells[k];
    cell.sampler = spec.label;
    cell.type = sampler_type(spec.config);
    cell.seed = job.seed;
    cell.run = run_sampler(*cell_target.target, spec, cfg.n_samples, x0, Rng(job.seed).split(job.sampler), budget);
    cell.expected_queries = expected_queries(spec, cfg.n_samples);
    cell.counts_match = cell.run.truncated || cell.run.counts.queries == cell.expected_queries;
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = next++; k < jobs.size(); k = next++) run_cell(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Metrics: a single-threaded pass over completed cells, one reference set per seed.
  const auto& m = cfg.metrics;
  for (auto seed : cfg.seeds) {
    std::optional<MmdReference> reference;
    PointSet reference_points;
    if (bundle.mixture && (m.mmd || m.histogram)) {
      reference_points = ground_truth(*bundle.mixture, m.reference_size, mix64(seed ^ kReferenceStream));
      if (m.mmd) {
        MmdConfig mc = *m.mmd;
        mc.subsample_seed = seed;
        reference.emplace(reference_points, mc);
      }
    }
    for (auto& cell : report.cells) {
      if (cell.seed != seed) continue;
      const auto& samples = cell.run.samples;
      report.truncated |= cell.run.truncated;
      if (samples.empty()) continue;
      if (reference) cell.metrics["mmd"] = reference->distance(samples);
      if (m.mae) cell.metrics["mae_percent"] = mae_quadratic(samples, *bundle.mixture);
      if (m.coverage_radius_sigma) {
        const auto& sd = bundle.mixture->stddevs();
        const double radius = *m.coverage_radius_sigma * *std::max_element(sd.begin(), sd.end());
        const auto cov = mode_coverage(samples, report.modes, radius);
        cell.metrics["mode_coverage"] = cov.count;
        cell.mode_mass = cov.per_mode_mass;
      }
      if (m.histogram) cell.metrics["histogram_kl"] = histogram_kl(reference_points, samples, *m.histogram);
      if (m.predictive_nll) cell.metrics["predictive_nll"] = bundle.bnn->predictive_nll(samples, *bundle.test_set);
      if (m.moments) {
        const auto n = static_cast<double>(samples.size());
        Point mean = Point::Zero(dim), sq = Point::Zero(dim);
        for (const auto& x : samples) {
          mean += x;
          sq += x.cwiseAbs2();
        }
        mean /= n;
        const Point var = (sq / n - mean.cwiseAbs2()) * (n / std::max(1.0, n - 1.0));
        cell.metrics["mean_abs_max"] = mean.cwiseAbs().maxCoeff();
        cell.metrics["variance_min"] = var.minCoeff();
        cell.metrics["variance_max"] = var.maxCoeff();
      }
    }
  }
  return report;
}

SweepResult sweep(const json& base, const std::string& parameter, const std::vector<json>& values) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  // Validate every point before running any of them.
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    json cfg = base;
    apply_override(cfg, parameter, v);
    configs.push_back(experiment_from_json(cfg));
  }
  SweepResult result;
  result.parameter = parameter;
  result.values = values;
  for (const auto& c : configs) result.reports.push_back(run_experiment(c));
  return result;
}

std::string primary_metric(const RunReport& report) {
  for (const auto& c : report.cells) {
    if (c.metrics.count("mmd")) return "mmd";
    if (c.metrics.count("predictive_nll")) return "predictive_nll";
  }
  return "mmd";
}

}  // namespace digs
