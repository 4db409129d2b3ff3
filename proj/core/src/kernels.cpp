#include "digs/kernels.hpp"

#include <cmath>
#include <numbers>

namespace digs {

using nlohmann::json;

NoiseSchedule vp_linear(int levels, double alpha_1, double alpha_T) {
  require(levels >= 1, "vp_linear: T must be at least 1");
  require(alpha_1 > 0.0 && alpha_1 < 1.0, "vp_linear: alpha_1 must lie in (0, 1)");
  NoiseSchedule schedule;
  if (levels == 1) {
    schedule.levels.push_back({alpha_1, std::sqrt(1.0 - alpha_1 * alpha_1)});
    return schedule;
  }
  require(alpha_T > 0.0 && alpha_T <= alpha_1, "vp_linear: need 0 < alpha_T <= alpha_1");
  for (int t = levels; t >= 1; --t) {
    const double a = alpha_T + (alpha_1 - alpha_T) * static_cast<double>(levels - t) /
                                   static_cast<double>(levels - 1);
    schedule.levels.push_back({a, std::sqrt(1.0 - a * a)});
  }
  return schedule;
}

NoiseSchedule single_level(const ConvolutionKernel& kernel) {
  validate_kernel(kernel);
  return NoiseSchedule{{kernel}};
}

NoiseSchedule schedule_from_json(const json& j) {
  const auto type = j.value("type", std::string("explicit"));
  if (type == "vp_linear") {
    return vp_linear(j.at("T").get<int>(), j.at("alpha_1").get<double>(), j.at("alpha_T").get<double>());
  }
  if (type == "explicit") {
    NoiseSchedule schedule;
    for (const auto& level : j.at("levels")) {
      ConvolutionKernel k{level.at(0).get<double>(), level.at(1).get<double>()};
      validate_kernel(k);
      schedule.levels.push_back(k);
    }
    require(!schedule.levels.empty(), "schedule: at least one level required");
    return schedule;
  }
  throw ConfigError("schedule: unknown type \"" + type + "\"");
}

json schedule_to_json(const NoiseSchedule& schedule) {
  json levels = json::array();
  for (const auto& k : schedule.levels) levels.push_back({k.alpha, k.sigma});
  return {{"type", "explicit"}, {"levels", levels}};
}

Point corrupt(const Point& x, const ConvolutionKernel& kernel, Rng& rng) {
  return corrupt_with_noise(x, kernel, rng.normal_vector(x.size()));
}

Point corrupt_with_noise(const Point& x, const ConvolutionKernel& kernel, const Point& eps) {
  require(eps.size() == x.size(), "corrupt: noise dimension mismatch");
  return kernel.alpha * x + kernel.sigma * eps;
}

double log_kernel_density(const Point& x_tilde, const Point& x, const ConvolutionKernel& kernel) {
  const double var = kernel.sigma * kernel.sigma;
  const double d = static_cast<double>(x.size());
  return -0.5 * (x_tilde - kernel.alpha * x).squaredNorm() / var -
         0.5 * d * std::log(2.0 * std::numbers::pi * var);
}

Point tweedie_mean(const Point& noisy_score, const Point& x_tilde, const ConvolutionKernel& kernel) {
  require(kernel.alpha != 0.0, "tweedie_mean: alpha must be non-zero");
  require(noisy_score.size() == x_tilde.size(), "tweedie_mean: dimension mismatch");
  return (x_tilde + kernel.sigma * kernel.sigma * noisy_score) / kernel.alpha;
}

DenoisingPosterior::DenoisingPosterior(const EnergyTarget& base, ConvolutionKernel kernel, Point x_tilde)
    : EnergyTarget(base.dim()), base_(base), kernel_(kernel), x_tilde_(std::move(x_tilde)) {
  require(kernel_.alpha > 0.0 && kernel_.sigma > 0.0,
          "DenoisingPosterior: alpha and sigma must be positive");
  require_dim(x_tilde_, base.dim(), "DenoisingPosterior x_tilde");
  inv_two_var_ = 0.5 / (kernel_.sigma * kernel_.sigma);
}

double DenoisingPosterior::tether(const Point& x) const {
  return inv_two_var_ * (kernel_.alpha * x - x_tilde_).squaredNorm();
}

Point DenoisingPosterior::tether_gradient(const Point& x) const {
  return (2.0 * inv_two_var_ * kernel_.alpha) * (kernel_.alpha * x - x_tilde_);
}

double DenoisingPosterior::compute_energy(const Point& x) const {
  return base_.energy(x) + tether(x);
}

double DenoisingPosterior::compute_energy_and_gradient(const Point& x, Point& grad) const {
  const double e = base_.energy_and_gradient(x, grad);
  grad.noalias() += (2.0 * inv_two_var_ * kernel_.alpha) * (kernel_.alpha * x - x_tilde_);
  return e + tether(x);
}

Point DenoisingPosterior::compute_gradient(const Point& x) const {
  return base_.gradient(x) + tether_gradient(x);
}

}  // namespace digs
