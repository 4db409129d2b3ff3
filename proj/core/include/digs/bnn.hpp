#pragma once

#include <Eigen/Core>
#include <vector>

#include "digs/energy_target.hpp"
#include "digs/rng.hpp"

namespace digs {

/// Regression data set; columns are observations.
struct Dataset {
  Eigen::MatrixXd inputs;   // d_x x N
  Eigen::MatrixXd outputs;  // d_y x N

  Eigen::Index size() const { return inputs.cols(); }
};

/// Fully connected ReLU network with linear output layer. The flattened
/// parameter vector stores, per layer, the weight matrix (column-major,
/// out x in) followed by the bias.
class ReluNetwork {
 public:
  explicit ReluNetwork(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int parameter_count() const { return parameter_count_; }
  int layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int fan_in(int layer) const { return sizes_[static_cast<std::size_t>(layer)]; }
  /// Offset and length of layer `l`'s block (weights then bias).
  std::pair<int, int> block(int layer) const;

  Eigen::MatrixXd forward(const Point& theta, const Eigen::MatrixXd& inputs) const;
  /// Smallest |pre-activation| over hidden units and inputs; ReLU kinks sit at 0.
  double min_abs_preactivation(const Point& theta, const Eigen::MatrixXd& inputs) const;

  /// Sum over columns of ||y - f(x)||^2 / 2 and its gradient wrt theta.
  double squared_error_and_gradient(const Point& theta, const Dataset& data, Point* grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int parameter_count_ = 0;
};

/// Posterior over network weights with a N(0, sigma_p^2 I) prior per layer
/// (sigma_p = 1/sqrt(fan-in)) and Gaussian likelihood with scale sigma_n.
class ToyBnnPosterior final : public EnergyTarget {
 public:
  ToyBnnPosterior(ReluNetwork network, Dataset train, double noise_std);

  std::string name() const override { return "bnn"; }

  const ReluNetwork& network() const { return network_; }
  const Dataset& train() const { return train_; }
  double noise_std() const { return noise_std_; }
  /// Per-parameter prior standard deviation.
  const Point& prior_std() const { return prior_std_; }

  /// Average test negative log predictive density of a posterior sample set.
  double predictive_nll(const std::vector<Point>& samples, const Dataset& test) const;

 protected:
  double compute_energy(const Point& theta) const override;
  double compute_energy_and_gradient(const Point& theta, Point& grad) const override;

 private:
  double evaluate(const Point& theta, Point* grad) const;

  ReluNetwork network_;
  Dataset train_;
  double noise_std_;
  Point prior_std_;
  double constant_ = 0.0;
};

/// Synthetic problem: ground-truth weights drawn from the prior generate
/// train and test sets with inputs x ~ N(0, I).
struct BnnProblem {
  std::vector<int> layer_sizes;
  double noise_std = 0.1;
  Point theta_star;
  Dataset train;
  Dataset test;
};

BnnProblem make_bnn_problem(std::vector<int> layer_sizes, int n_train, int n_test, double noise_std,
                            std::uint64_t seed);

/// Draw theta ~ N(0, diag(prior_std^2)).
Point sample_bnn_prior(const ReluNetwork& network, Rng& rng);

}  // namespace digs
