#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "digs/error.hpp"
#include "digs/harness.hpp"

namespace digs {

using nlohmann::json;

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json counts_json(const EvalCounts& c) {
  return {{"energy", c.energy}, {"gradient", c.gradient}, {"queries", c.queries}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string value_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

json report_to_json(const RunReport& report, bool include_wall_time) {
  json results = json::array();
  std::vector<std::uint64_t> seeds;
  for (const auto& c : report.cells) {
    if (std::find(seeds.begin(), seeds.end(), c.seed) == seeds.end()) seeds.push_back(c.seed);
    json acceptance = json::object();
    for (const auto& [name, a] : c.run.acceptance)
      acceptance[name] = {{"proposed", a.proposed}, {"accepted", a.accepted}, {"rate", a.rate()}};
    json metrics = json::object();
    for (const auto& [name, v] : c.metrics) metrics[name] = v;
    json cell = {{"sampler", c.sampler},
                 {"type", c.type},
                 {"seed", c.seed},
                 {"n_kept", c.run.samples.size()},
                 {"truncated", c.run.truncated},
                 {"counts", counts_json(c.run.counts)},
                 {"tuning_counts", counts_json(c.run.tuning_counts)},
                 {"expected_queries", c.expected_queries},
                 {"counts_match", c.counts_match},
                 {"acceptance", acceptance},
                 {"tuned", c.run.tuned},
                 {"warnings", c.run.warnings},
                 {"metrics", metrics},
                 {"mode_mass", c.mode_mass}};
    if (include_wall_time) cell["wall_seconds"] = c.run.wall_seconds;
    results.push_back(std::move(cell));
  }
  json summary = json::object();
  for (const auto& label : report.sampler_labels()) {
    json entry = json::object();
    std::vector<std::string> names;
    for (const auto& c : report.cells)
      if (c.sampler == label)
        for (const auto& [name, v] : c.metrics)
          if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    for (const auto& name : names) {
      const auto s = report.summary(label, name);
      entry[name] = {{"mean", s.mean}, {"stderr", s.stderr_}, {"n", s.n}};
    }
    summary[label] = {{"metrics", entry}, {"queries_per_sample", report.queries_per_sample(label)}};
  }
  return {{"schema_version", kReportSchemaVersion},
          {"artifact_version", report.version},
          {"experiment", report.experiment},
          {"tier", report.tier},
          {"dim", report.dim},
          {"seeds", seeds},
          {"truncated", report.truncated},
          {"config", report.config},
          {"results", results},
          {"summary", summary}};
}

std::string samples_csv(const RunReport& report) {
  std::string out = "sampler,seed,index";
  for (int i = 0; i < report.dim; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (const auto& c : report.cells) {
    const auto prefix = csv_field(c.sampler) + "," + std::to_string(c.seed) + ",";
    for (std::size_t k = 0; k < c.run.samples.size(); ++k) {
      out += prefix + std::to_string(k);
      const auto& x = c.run.samples[k];
      for (Eigen::Index i = 0; i < x.size(); ++i) out += "," + num17(x(i));
      out += '\n';
    }
  }
  return out;
}

std::string scatter_svg(const RunReport& report) {
  if (report.dim != 2) throw ContractViolation("scatter_svg: needs a 2D target");
  const auto labels = report.sampler_labels();
  const std::uint64_t seed = report.cells.empty() ? 0 : report.cells.front().seed;

  double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
  bool first = true;
  auto extend = [&](const Point& p) {
    if (!std::isfinite(p(0)) || !std::isfinite(p(1))) return;
    if (first) {
      lo_x = hi_x = p(0);
      lo_y = hi_y = p(1);
      first = false;
    }
    lo_x = std::min(lo_x, p(0));
    hi_x = std::max(hi_x, p(0));
    lo_y = std::min(lo_y, p(1));
    hi_y = std::max(hi_y, p(1));
  };
  for (const auto& m : report.modes) extend(m);
  for (const auto& c : report.cells)
    if (c.seed == seed)
      for (const auto& x : c.run.samples) extend(x);
  const double pad_x = 0.05 * std::max(hi_x - lo_x, 1e-9), pad_y = 0.05 * std::max(hi_y - lo_y, 1e-9);
  lo_x -= pad_x;
  hi_x += pad_x;
  lo_y -= pad_y;
  hi_y += pad_y;

  const int panel = 320, title = 24, cols = static_cast<int>(std::min<std::size_t>(labels.size(), 4));
  const int rows = static_cast<int>((labels.size() + 3) / 4);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * panel << "\" height=\""
      << rows * (panel + title) << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int ox = static_cast<int>(p % 4) * panel, oy = static_cast<int>(p / 4) * (panel + title);
    const int inner = panel - 20;
    auto px = [&](double x) { return ox + 10 + (x - lo_x) / (hi_x - lo_x) * inner; };
    auto py = [&](double y) { return oy + title + 10 + (hi_y - y) / (hi_y - lo_y) * inner; };
    svg << "<text x=\"" << ox + 10 << "\" y=\"" << oy + 17 << "\">" << xml_escape(labels[p]) << " (seed " << seed
        << ")</text>\n";
    svg << "<rect x=\"" << ox + 10 << "\" y=\"" << oy + title + 10 << "\" width=\"" << inner << "\" height=\"" << inner
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg << "<g fill=\"#1f77b4\" fill-opacity=\"0.4\">\n";
    for (const auto& c : report.cells) {
      if (c.sampler != labels[p] || c.seed != seed) continue;
      for (const auto& x : c.run.samples)
        if (std::isfinite(x(0)) && std::isfinite(x(1)))
          svg << "<circle cx=\"" << num2(px(x(0))) << "\" cy=\"" << num2(py(x(1))) << "\" r=\"1.5\"/>\n";
    }
    svg << "</g>\n<g fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\">\n";
    for (const auto& m : report.modes)
      svg << "<circle cx=\"" << num2(px(m(0))) << "\" cy=\"" << num2(py(m(1))) << "\" r=\"4\"/>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string marginals_csv(const RunReport& report, int bins) {
  require(bins >= 1, "marginals_csv: bins must be positive");
  std::string out = "sampler,seed,dim,bin_lo,bin_hi,density\n";
  for (const auto& c : report.cells) {
    if (c.seed != report.cells.front().seed || c.run.samples.empty()) continue;
    for (int d = 0; d < report.dim; ++d) {
      double lo = c.run.samples.front()(d), hi = lo;
      for (const auto& x : c.run.samples) {
        lo = std::min(lo, x(d));
        hi = std::max(hi, x(d));
      }
      if (hi <= lo) hi = lo + 1.0;
      const double width = (hi - lo) / bins;
      std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
      for (const auto& x : c.run.samples) {
        const int b = std::min(bins - 1, static_cast<int>((x(d) - lo) / width));
        counts[static_cast<std::size_t>(b)] += 1.0;
      }
      const double norm = static_cast<double>(c.run.samples.size()) * width;
      for (int b = 0; b < bins; ++b)
        out += csv_field(c.sampler) + "," + std::to_string(c.seed) + "," + std::to_string(d) + "," +
               num17(lo + b * width) + "," + num17(lo + (b + 1) * width) + "," +
               num17(counts[static_cast<std::size_t>(b)] / norm) + "\n";
    }
  }
  return out;
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  write_file(dir / "samples.csv", samples_csv(report));
  if (report.dim == 2) {
    write_file(dir / "scatter.svg", scatter_svg(report));
  } else {
    write_file(dir / "marginals.csv", marginals_csv(report));
  }
}

std::string sweep_summary_csv(const SweepResult& result) {
  std::string out = "value,sampler,metric,mean,stderr,n\n";
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    const auto metric = primary_metric(r);
    for (const auto& label : r.sampler_labels()) {
      const auto s = r.summary(label, metric);
      out += csv_field(value_label(result.values[i])) + "," + csv_field(label) + "," + metric + "," + num17(s.mean) +
             "," + num17(s.stderr_) + "," + std::to_string(s.n) + "\n";
    }
  }
  return out;
}

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < result.reports.size(); ++i)
    write_outputs(result.reports[i], dir / (result.parameter + "=" + value_label(result.values[i])));
  write_file(dir / "sweep_summary.csv", sweep_summary_csv(result));
}

}  // namespace digs
