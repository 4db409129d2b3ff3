#pragma once

#include <Eigen/Core>
#include <vector>

#include "digs/convolution_kernel.hpp"
#include "digs/energy_target.hpp"

namespace digs {

/// Isotropic Gaussian mixture. Energy is the negative log of the normalized
/// density, so analytic oracles match it exactly.
class MixtureOfGaussians final : public EnergyTarget {
 public:
  MixtureOfGaussians(std::vector<double> weights, std::vector<Point> means,
                     std::vector<double> stddevs);
  /// Shared component standard deviation.
  MixtureOfGaussians(std::vector<double> weights, std::vector<Point> means, double stddev);

  std::string name() const override { return "mog"; }

  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& stddevs() const { return stddevs_; }
  Point mean(std::size_t i) const { return means_.col(static_cast<Eigen::Index>(i)); }
  std::vector<Point> means() const;

  /// log p(x), normalized. Not counted.
  double log_density(const Point& x) const;
  /// grad log p(x). Not counted; used by analytic oracles.
  Point analytic_score(const Point& x) const;

  /// E_p[||x||^2] = sum_i w_i (||mu_i||^2 + d sigma_i^2).
  double second_moment() const;

 protected:
  double compute_energy(const Point& x) const override;
  double compute_energy_and_gradient(const Point& x, Point& grad) const override;

 private:
  double accumulate(const Point& x, Point* grad) const;

  std::vector<double> weights_;
  std::vector<double> stddevs_;
  Eigen::MatrixXd means_;  // d x K
  std::vector<double> log_norm_;
  std::vector<double> inv_var_;
};

/// Analytic noisy marginal of a mixture under a Gaussian kernel: means
/// alpha mu_i, variances alpha^2 sigma_i^2 + sigma^2, same weights.
MixtureOfGaussians mog_convolve(const MixtureOfGaussians& target, const ConvolutionKernel& kernel);

/// Numerically stable log(sum(exp(values))).
double log_sum_exp(const std::vector<double>& values);

}  // namespace digs
