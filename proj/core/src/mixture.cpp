#include "digs/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace digs {

namespace {
int checked_dim(const std::vector<Point>& means) {
  require(!means.empty(), "MixtureOfGaussians: at least one component required");
  return static_cast<int>(means.front().size());
}
}  // namespace

bool validate_kernel(const ConvolutionKernel& k, KernelDomain domain) {
  require(std::isfinite(k.alpha) && std::isfinite(k.sigma), "kernel parameters must be finite");
  require(k.alpha > 0.0, "kernel alpha must be positive");
  require(k.sigma > 0.0, "kernel sigma must be positive");
  const bool standard = k.alpha <= 1.0;
  if (domain == KernelDomain::standard) {
    require(standard, "kernel alpha must lie in (0, 1]");
    return false;
  }
  require(k.alpha <= 5.0, "kernel alpha must lie in (0, 5] in sweep mode");
  require(k.sigma <= 20.0, "kernel sigma must lie in (0, 20] in sweep mode");
  return !standard;
}

MixtureOfGaussians::MixtureOfGaussians(std::vector<double> weights, std::vector<Point> means,
                                       double stddev)
    : MixtureOfGaussians(weights, means, std::vector<double>(means.size(), stddev)) {}

MixtureOfGaussians::MixtureOfGaussians(std::vector<double> weights, std::vector<Point> means,
                                       std::vector<double> stddevs)
    : EnergyTarget(checked_dim(means)), weights_(std::move(weights)), stddevs_(std::move(stddevs)) {
  const std::size_t k = means.size();
  require(weights_.size() == k && stddevs_.size() == k,
          "MixtureOfGaussians: weights, means and stddevs must have equal length");
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-12, "MixtureOfGaussians: weights must sum to 1");
  means_.resize(dim(), static_cast<Eigen::Index>(k));
  log_norm_.resize(k);
  inv_var_.resize(k);
  const double d = dim();
  for (std::size_t i = 0; i < k; ++i) {
    require(weights_[i] > 0.0, "MixtureOfGaussians: weights must be positive");
    require(stddevs_[i] > 0.0 && std::isfinite(stddevs_[i]),
            "MixtureOfGaussians: stddevs must be positive");
    require_dim(means[i], dim(), "MixtureOfGaussians mean");
    require(means[i].allFinite(), "MixtureOfGaussians: means must be finite");
    means_.col(static_cast<Eigen::Index>(i)) = means[i];
    const double var = stddevs_[i] * stddevs_[i];
    inv_var_[i] = 1.0 / var;
    log_norm_[i] = std::log(weights_[i]) - 0.5 * d * std::log(2.0 * std::numbers::pi * var);
  }
}

std::vector<Point> MixtureOfGaussians::means() const {
  std::vector<Point> out;
  out.reserve(components());
  for (std::size_t i = 0; i < components(); ++i) out.push_back(mean(i));
  return out;
}

// Single pass log-sum-exp with a running max; the gradient accumulator is
// rescaled together with the sum.
double MixtureOfGaussians::accumulate(const Point& x, Point* grad) const {
  // Components more than kCutoff below the largest log term change neither the
  // sum nor the gradient at double precision.
  constexpr double kCutoff = 40.0;
  thread_local std::vector<double> terms;
  const Eigen::Index K = means_.cols();
  terms.resize(static_cast<std::size_t>(K));
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    terms[k] = log_norm_[k] - 0.5 * inv_var_[k] * (x - means_.col(i)).squaredNorm();
    top = std::max(top, terms[k]);
  }
  double sum = 0.0;
  if (grad) grad->setZero(dim());
  for (Eigen::Index i = 0; i < K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (terms[k] < top - kCutoff) continue;
    const double w = std::exp(terms[k] - top);
    sum += w;
    if (grad) grad->noalias() += (w * inv_var_[k]) * (x - means_.col(i));
  }
  if (grad) *grad /= sum;
  return -(top + std::log(sum));
}

double MixtureOfGaussians::compute_energy(const Point& x) const { return accumulate(x, nullptr); }

double MixtureOfGaussians::compute_energy_and_gradient(const Point& x, Point& grad) const {
  return accumulate(x, &grad);
}

double MixtureOfGaussians::log_density(const Point& x) const {
  require_dim(x, dim(), "log_density");
  return -accumulate(x, nullptr);
}

Point MixtureOfGaussians::analytic_score(const Point& x) const {
  require_dim(x, dim(), "analytic_score");
  Point g;
  accumulate(x, &g);
  return -g;
}

double MixtureOfGaussians::second_moment() const {
  double total = 0.0;
  for (std::size_t i = 0; i < components(); ++i) {
    total += weights_[i] * (mean(i).squaredNorm() + dim() * stddevs_[i] * stddevs_[i]);
  }
  return total;
}

MixtureOfGaussians mog_convolve(const MixtureOfGaussians& target, const ConvolutionKernel& kernel) {
  require(kernel.alpha > 0.0 && kernel.sigma > 0.0, "mog_convolve: alpha and sigma must be positive");
  std::vector<Point> means;
  std::vector<double> stddevs;
  for (std::size_t i = 0; i < target.components(); ++i) {
    means.push_back(kernel.alpha * target.mean(i));
    const double s = target.stddevs()[i];
    stddevs.push_back(std::sqrt(kernel.alpha * kernel.alpha * s * s + kernel.sigma * kernel.sigma));
  }
  return MixtureOfGaussians(target.weights(), std::move(means), std::move(stddevs));
}

double log_sum_exp(const std::vector<double>& values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace digs
