#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "digs/convolution_kernel.hpp"
#include "digs/energy_target.hpp"
#include "digs/rng.hpp"

namespace digs {

/// Kernels applied coarse to fine: levels[0] is t = T (most noise), the last
/// entry is t = 1.
struct NoiseSchedule {
  std::vector<ConvolutionKernel> levels;

  std::size_t size() const { return levels.size(); }
  bool operator==(const NoiseSchedule&) const = default;
};

/// Linear variance-preserving schedule:
///   alpha_t = alpha_T + (alpha_1 - alpha_T) (T - t) / (T - 1),  sigma_t = sqrt(1 - alpha_t^2).
NoiseSchedule vp_linear(int levels, double alpha_1, double alpha_T);
NoiseSchedule single_level(const ConvolutionKernel& kernel);

/// {"type":"vp_linear","T":n,"alpha_1":a1,"alpha_T":aT} or
/// {"type":"explicit","levels":[[alpha, sigma], ...]}.
NoiseSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const NoiseSchedule& schedule);

/// x~ = alpha x + sigma eps, eps ~ N(0, I).
Point corrupt(const Point& x, const ConvolutionKernel& kernel, Rng& rng);
/// Same with the standard-normal draw supplied by the caller.
Point corrupt_with_noise(const Point& x, const ConvolutionKernel& kernel, const Point& eps);

/// log N(x~ | alpha x, sigma^2 I).
double log_kernel_density(const Point& x_tilde, const Point& x, const ConvolutionKernel& kernel);

/// Posterior mean from the noisy score: (x~ + sigma^2 score) / alpha.
Point tweedie_mean(const Point& noisy_score, const Point& x_tilde, const ConvolutionKernel& kernel);

/// p(x | x~) ∝ exp(-E(x) - ||alpha x - x~||^2 / (2 sigma^2)).
///
/// Every evaluation is one query against the base target; the quadratic
/// tether is free.
class DenoisingPosterior final : public EnergyTarget {
 public:
  DenoisingPosterior(const EnergyTarget& base, ConvolutionKernel kernel, Point x_tilde);

  std::string name() const override { return "denoising(" + base_.name() + ")"; }

  const EnergyTarget& base() const { return base_; }
  const ConvolutionKernel& kernel() const { return kernel_; }
  const Point& x_tilde() const { return x_tilde_; }

  double tether(const Point& x) const;
  Point tether_gradient(const Point& x) const;

  /// Tractable score: -grad E(x) - alpha (alpha x - x~) / sigma^2.
  Point denoising_score(const Point& x) const { return -gradient(x); }

 protected:
  double compute_energy(const Point& x) const override;
  double compute_energy_and_gradient(const Point& x, Point& grad) const override;
  Point compute_gradient(const Point& x) const override;

 private:
  const EnergyTarget& base_;
  ConvolutionKernel kernel_;
  Point x_tilde_;
  double inv_two_var_;
};

}  // namespace digs
