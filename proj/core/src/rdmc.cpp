#include "digs/rdmc.hpp"

#include <cmath>

namespace digs {

void validate(const RdmcConfig& cfg) {
  require(cfg.steps >= 1, "RdmcConfig: T must be at least 1");
  require(cfg.total_time > 0.0, "RdmcConfig: Gamma must be positive");
  require(cfg.posterior_samples >= 1, "RdmcConfig: K must be at least 1");
  require(cfg.ula_steps >= 1, "RdmcConfig: L_ULA must be at least 1");
  require(cfg.ula_step_size > 0.0, "RdmcConfig: ULA step size must be positive");
  require(cfg.is_samples >= 1, "RdmcConfig: S_is must be at least 1");
}

ConvolutionKernel rdmc_kernel(const RdmcConfig& cfg, int t) {
  const double eta = cfg.total_time / cfg.steps;
  const double a = std::exp(-(cfg.total_time - t * eta));
  return {a, std::sqrt(1.0 - a * a)};
}

Point rdmc_score_estimate(const PointSet& posterior_samples, const Point& x_t, const ConvolutionKernel& kernel) {
  require(!posterior_samples.empty(), "rdmc_score_estimate: no posterior samples");
  Point mean = Point::Zero(x_t.size());
  for (const auto& s : posterior_samples) mean += s;
  mean /= static_cast<double>(posterior_samples.size());
  return (kernel.alpha * mean - x_t) / (kernel.sigma * kernel.sigma);
}

std::uint64_t rdmc_cost_per_sample(const RdmcConfig& cfg) {
  return static_cast<std::uint64_t>(cfg.steps) * cfg.posterior_samples * (cfg.ula_steps + cfg.is_samples) +
         cfg.ula_steps;
}

namespace {

/// ULA from x using gradient-only queries; L queries.
Point ula_chain(const EnergyTarget& target, Point x, int steps, double eta, Rng& rng) {
  ChainState s;
  s.grad = target.gradient(x);
  s.x = std::move(x);
  for (int i = 0; i < steps; ++i) {
    s.x += -eta * s.grad + std::sqrt(2.0 * eta) * rng.normal_vector(s.x.size());
    if (i + 1 < steps) s.grad = target.gradient(s.x);
  }
  return s.x;
}

/// Self-normalized importance resampling of one point from p(x0 | x_t) with
/// proposal N(x_t / a, sigma^2 / a^2 I). The proposal matches the tether, so
/// the weights reduce to exp(-E).
Point importance_init(const EnergyTarget& target, const Point& x_t, const ConvolutionKernel& k, int count,
                      Rng& rng) {
  PointSet proposals(count);
  std::vector<double> log_w(count);
  double max_w = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < count; ++j) {
    proposals[j] = x_t / k.alpha + (k.sigma / k.alpha) * rng.normal_vector(x_t.size());
    log_w[j] = -target.energy(proposals[j]);
    max_w = std::max(max_w, log_w[j]);
  }
  double total = 0.0;
  for (double& w : log_w) total += (w = std::exp(w - max_w));
  double u = rng.uniform() * total;
  for (int j = 0; j < count; ++j) {
    u -= log_w[j];
    if (u <= 0.0) return proposals[j];
  }
  return proposals.back();
}

}  // namespace

SamplerRun rdmc_run(const EnergyTarget& target, const RdmcConfig& cfg, int n_samples, Rng& rng, RunBudget budget) {
  validate(cfg);
  RunRecorder rec(target, "rdmc", budget);
  const double eta = cfg.total_time / cfg.steps;
  const double init_sd = std::sqrt(1.0 - std::exp(-2.0 * cfg.total_time));
  const double drift = std::exp(eta);
  const double noise = std::sqrt(std::exp(2.0 * eta) - 1.0);
  PointSet inner(cfg.posterior_samples);
  for (int s = 0; s < n_samples; ++s) {
    Point x = init_sd * rng.normal_vector(target.dim());
    for (int t = 0; t < cfg.steps; ++t) {
      const ConvolutionKernel k = rdmc_kernel(cfg, t);
      const DenoisingPosterior dp(target, k, x);
      for (auto& x0 : inner) {
        x0 = importance_init(target, x, k, cfg.is_samples, rng);
        x0 = ula_chain(dp, std::move(x0), cfg.ula_steps, cfg.ula_step_size, rng);
      }
      const Point score = rdmc_score_estimate(inner, x, k);
      x = drift * x + 2.0 * (drift - 1.0) * score + noise * rng.normal_vector(x.size());
    }
    x = ula_chain(target, std::move(x), cfg.ula_steps, cfg.ula_step_size, rng);
    if (!rec.keep(x)) break;
  }
  return rec.finish();
}

}  // namespace digs
