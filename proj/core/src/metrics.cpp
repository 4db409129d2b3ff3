#include "digs/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "digs/error.hpp"
#include "digs/rng.hpp"
#include "exp_batch.hpp"

namespace digs {

using nlohmann::json;

void validate(const MmdConfig& cfg) {
  require(!cfg.bandwidths.empty(), "MmdConfig: no bandwidths");
  for (double h : cfg.bandwidths) require(h > 0.0, "MmdConfig: bandwidths must be positive");
  require(cfg.max_points >= 2, "MmdConfig: max_points must be at least 2");
}

MmdConfig mmd_config_from_json(const json& j) {
  MmdConfig c;
  if (j.contains("bandwidths")) c.bandwidths = j.at("bandwidths").get<std::vector<double>>();
  if (j.contains("estimator")) {
    const auto e = j.at("estimator").get<std::string>();
    if (e == "biased") c.estimator = MmdEstimator::biased;
    else if (e == "unbiased") c.estimator = MmdEstimator::unbiased;
    else throw ConfigError("unknown MMD estimator '" + e + "'");
  }
  if (j.contains("max_points")) c.max_points = j.at("max_points").get<std::size_t>();
  validate(c);
  return c;
}

json mmd_config_to_json(const MmdConfig& cfg) {
  return {{"bandwidths", cfg.bandwidths},
          {"estimator", cfg.estimator == MmdEstimator::biased ? "biased" : "unbiased"},
          {"max_points", cfg.max_points},
          {"kernel", "exp(-||x-y||^2/(2h^2))"},
          {"aggregation", "sqrt(max(0, sum_h MMD_h^2))"}};
}

namespace {

struct Neumaier {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  void add(const Neumaier& o) {
    add(o.sum);
    add(o.c);
  }
  double value() const { return sum + c; }
};

const PointSet& subsample(const PointSet& s, std::size_t cap, std::uint64_t seed, PointSet& storage) {
  if (s.size() <= cap) return s;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed, 0x4d4d44);
  for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + rng.below(s.size() - i)]);
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cap));
  storage.clear();
  for (std::size_t i = 0; i < cap; ++i) storage.push_back(s[idx[i]]);
  return storage;
}

/// sum over (i, j) of k_h(x_i, y_j) for every h; with `same` only i < j pairs
/// are visited and the result is doubled. Rows are cut into fixed blocks whose
/// partial sums are combined in block order, so the result does not depend on
/// the number of threads.
std::vector<double> kernel_sums(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, bool same,
                                const std::vector<double>& bw, unsigned threads) {
  const Eigen::Index n = x.cols(), m = y.cols(), d = x.rows();
  const std::size_t H = bw.size();
  std::vector<double> coef(H);
  for (std::size_t h = 0; h < H; ++h) coef[h] = -1.0 / (2.0 * bw[h] * bw[h]);
  // Bandwidths doubling from one to the next: k_{h/2} = k_h^4, one exp per pair.
  bool doubling = H > 1;
  for (std::size_t h = 1; h < H; ++h) doubling = doubling && bw[h] == 2.0 * bw[h - 1];

  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<Neumaier> partial(static_cast<std::size_t>(blocks) * H);
  std::atomic<Eigen::Index> next{0};
  const double* xd = x.data();
  const double* yd = y.data();

  auto worker = [&] {
    std::vector<double> row(H), d2(static_cast<std::size_t>(m)), arg(d2.size()), k(d2.size());
    for (Eigen::Index b; (b = next.fetch_add(1)) < blocks;) {
      Neumaier* acc = &partial[static_cast<std::size_t>(b) * H];
      const Eigen::Index end = std::min(n, (b + 1) * kBlock);
      for (Eigen::Index i = b * kBlock; i < end; ++i) {
        const double* xi = xd + i * d;
        const Eigen::Index j0 = same ? i + 1 : 0;
        const std::size_t cnt = static_cast<std::size_t>(m - j0);
        for (Eigen::Index j = j0; j < m; ++j) {
          const double* yj = yd + j * d;
          double s = 0.0;
          for (Eigen::Index c = 0; c < d; ++c) {
            const double t = xi[c] - yj[c];
            s += t * t;
          }
          d2[static_cast<std::size_t>(j - j0)] = s;
        }
        std::fill(row.begin(), row.end(), 0.0);
        if (doubling) {
          for (std::size_t j = 0; j < cnt; ++j) arg[j] = coef[H - 1] * d2[j];
          detail::exp_batch(arg.data(), k.data(), cnt);
          for (std::size_t j = 0; j < cnt; ++j) {
            double e = k[j];
            for (std::size_t h = H; h-- > 0;) {
              row[h] += e;
              e *= e;
              e *= e;
            }
          }
        } else {
          for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t j = 0; j < cnt; ++j) arg[j] = coef[h] * d2[j];
            detail::exp_batch(arg.data(), k.data(), cnt);
            for (std::size_t j = 0; j < cnt; ++j) row[h] += k[j];
          }
        }
        for (std::size_t h = 0; h < H; ++h) acc[h].add(row[h]);
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::max<Eigen::Index>(1, std::min<Eigen::Index>(threads, blocks)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> out(H);
  for (std::size_t h = 0; h < H; ++h) {
    Neumaier total;
    for (Eigen::Index b = 0; b < blocks; ++b) total.add(partial[static_cast<std::size_t>(b) * H + h]);
    out[h] = (same ? 2.0 : 1.0) * total.value();
  }
  return out;
}

/// Total order on sample sets so that mmd(a, b) and mmd(b, a) run the same sums.
bool canonical_less(const PointSet& a, const PointSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (Eigen::Index k = 0; k < a[i].size(); ++k) {
      if (a[i](k) != b[i](k)) return a[i](k) < b[i](k);
    }
  }
  return false;
}

std::vector<double> combine(const std::vector<double>& kaa, const std::vector<double>& kbb,
                            const std::vector<double>& kab, Eigen::Index na, Eigen::Index nb, MmdEstimator est) {
  const double n = static_cast<double>(na), m = static_cast<double>(nb);
  require(est == MmdEstimator::biased || (na >= 2 && nb >= 2), "mmd: unbiased estimator needs two points per set");
  std::vector<double> out(kaa.size());
  for (std::size_t h = 0; h < out.size(); ++h) {
    if (est == MmdEstimator::unbiased)
      out[h] = kaa[h] / (n * (n - 1)) + kbb[h] / (m * (m - 1)) - 2.0 * kab[h] / (n * m);
    else  // diagonal terms k(x, x) = 1
      out[h] = (kaa[h] + n) / (n * n) + (kbb[h] + m) / (m * m) - 2.0 * kab[h] / (n * m);
  }
  return out;
}

Eigen::MatrixXd to_matrix(const PointSet& s) {
  Eigen::MatrixXd m(s.front().size(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = s[i];
  return m;
}

}  // namespace

std::vector<double> mmd_squared_terms(const PointSet& first, const PointSet& second, const MmdConfig& cfg) {
  validate(cfg);
  const bool swap = canonical_less(second, first);
  const PointSet& a_in = swap ? second : first;
  const PointSet& b_in = swap ? first : second;
  require(!a_in.empty() && !b_in.empty(), "mmd: empty sample set");
  const auto d = a_in.front().size();
  for (const auto& p : a_in) require(p.size() == d, "mmd: inconsistent dimensions");
  for (const auto& p : b_in) require(p.size() == d, "mmd: dimension mismatch between sets");

  PointSet sa, sb;
  const PointSet& a = subsample(a_in, cfg.max_points, cfg.subsample_seed, sa);
  const PointSet& b = subsample(b_in, cfg.max_points, cfg.subsample_seed + 1, sb);
  const Eigen::MatrixXd xa = to_matrix(a), xb = to_matrix(b);
  const auto kaa = kernel_sums(xa, xa, true, cfg.bandwidths, cfg.threads);
  const auto kbb = kernel_sums(xb, xb, true, cfg.bandwidths, cfg.threads);
  const auto kab = kernel_sums(xa, xb, false, cfg.bandwidths, cfg.threads);
  return combine(kaa, kbb, kab, xa.cols(), xb.cols(), cfg.estimator);
}

MmdReference::MmdReference(const PointSet& points, MmdConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  require(!points.empty(), "MmdReference: empty reference set");
  PointSet storage;
  points_ = to_matrix(subsample(points, cfg_.max_points, cfg_.subsample_seed + 1, storage));
  self_sums_ = kernel_sums(points_, points_, true, cfg_.bandwidths, cfg_.threads);
}

std::vector<double> MmdReference::squared_terms(const PointSet& samples) const {
  require(!samples.empty(), "mmd: empty sample set");
  for (const auto& p : samples) require(p.size() == points_.rows(), "mmd: dimension mismatch between sets");
  PointSet storage;
  const Eigen::MatrixXd xa = to_matrix(subsample(samples, cfg_.max_points, cfg_.subsample_seed, storage));
  const auto kaa = kernel_sums(xa, xa, true, cfg_.bandwidths, cfg_.threads);
  const auto kab = kernel_sums(xa, points_, false, cfg_.bandwidths, cfg_.threads);
  return combine(kaa, self_sums_, kab, xa.cols(), points_.cols(), cfg_.estimator);
}

double MmdReference::distance(const PointSet& samples) const {
  const auto terms = squared_terms(samples);
  Neumaier total;
  for (double t : terms) total.add(t);
  return std::sqrt(std::max(0.0, total.value()));
}

double mmd(const PointSet& a, const PointSet& b, const MmdConfig& cfg) {
  const auto terms = mmd_squared_terms(a, b, cfg);
  Neumaier total;
  for (double t : terms) total.add(t);
  return std::sqrt(std::max(0.0, total.value()));
}

double mae_quadratic(const PointSet& samples, const MixtureOfGaussians& target) {
  require(!samples.empty(), "mae_quadratic: empty sample set");
  const double truth = target.second_moment();
  require(truth != 0.0, "mae_quadratic: true expectation is zero");
  Neumaier s;
  for (const auto& x : samples) {
    require_dim(x, target.dim(), "mae_quadratic");
    s.add(x.squaredNorm());
  }
  const double est = s.value() / static_cast<double>(samples.size());
  return std::abs(est - truth) / std::abs(truth) * 100.0;
}

void validate(const HistogramSpec& spec, int dim) {
  require(dim >= 1 && dim <= 2, "histogram: only 1D and 2D histograms are supported");
  require(static_cast<int>(spec.bins.size()) == dim && static_cast<int>(spec.range.size()) == dim,
          "histogram: bins and range must have one entry per dimension");
  for (int b : spec.bins) require(b >= 2, "histogram: at least two bins per dimension");
  for (const auto& [lo, hi] : spec.range) require(lo < hi, "histogram: empty range");
  require(spec.pseudocount > 0.0, "histogram: pseudocount must be positive");
}

std::vector<double> histogram(const PointSet& samples, const HistogramSpec& spec) {
  require(!samples.empty(), "histogram: empty sample set");
  const int dim = static_cast<int>(samples.front().size());
  validate(spec, dim);
  std::size_t total_bins = 1;
  for (int b : spec.bins) total_bins *= static_cast<std::size_t>(b);
  std::vector<double> counts(total_bins, 0.0);
  for (const auto& x : samples) {
    require_dim(x, dim, "histogram");
    std::size_t flat = 0;
    for (int k = 0; k < dim; ++k) {
      const auto [lo, hi] = spec.range[k];
      const int nb = spec.bins[k];
      const int i = std::clamp(static_cast<int>(std::floor((x(k) - lo) / (hi - lo) * nb)), 0, nb - 1);
      flat = flat * static_cast<std::size_t>(nb) + static_cast<std::size_t>(i);
    }
    counts[flat] += 1.0;
  }
  const double norm = static_cast<double>(samples.size()) + spec.pseudocount * static_cast<double>(total_bins);
  for (double& c : counts) c = (c + spec.pseudocount) / norm;
  return counts;
}

double histogram_kl(const PointSet& p, const PointSet& q, const HistogramSpec& spec) {
  const auto hp = histogram(p, spec);
  const auto hq = histogram(q, spec);
  Neumaier kl;
  for (std::size_t i = 0; i < hp.size(); ++i) kl.add(hp[i] * std::log(hp[i] / hq[i]));
  return std::max(0.0, kl.value());
}

ModeCoverage mode_coverage(const PointSet& samples, const PointSet& modes, double radius) {
  require(radius > 0.0, "mode_coverage: radius must be positive");
  require(!modes.empty(), "mode_coverage: no modes");
  ModeCoverage out;
  out.per_mode_mass.assign(modes.size(), 0.0);
  std::vector<bool> hit(modes.size(), false);
  const double r2 = radius * radius;
  for (const auto& x : samples) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double d2 = (x - modes[j]).squaredNorm();
      if (d2 <= r2) hit[j] = true;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    out.per_mode_mass[best] += 1.0;
  }
  if (!samples.empty())
    for (double& m : out.per_mode_mass) m /= static_cast<double>(samples.size());
  out.count = static_cast<int>(std::count(hit.begin(), hit.end(), true));
  return out;
}

PointSet ground_truth(const MixtureOfGaussians& target, int n, std::uint64_t seed) {
  require(n >= 1, "ground_truth: n must be at least 1");
  std::vector<double> cdf(target.components());
  std::partial_sum(target.weights().begin(), target.weights().end(), cdf.begin());
  Rng rng(seed, 0x67726f756e64);
  PointSet out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    const auto c = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end() - 1, u) - cdf.begin());
    out.push_back(target.mean(c) + target.stddevs()[c] * rng.normal_vector(target.dim()));
  }
  return out;
}

}  // namespace digs
