#include "digs/bnn.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "digs/mixture.hpp"

namespace digs {

namespace {
Eigen::Map<const Eigen::MatrixXd> weights_view(const Point& theta, int offset, int rows, int cols) {
  return {theta.data() + offset, rows, cols};
}
}  // namespace

ReluNetwork::ReluNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  require(sizes_.size() >= 2, "ReluNetwork: need at least input and output sizes");
  for (int s : sizes_) require(s >= 1, "ReluNetwork: layer sizes must be positive");
  for (int l = 0; l < layers(); ++l) {
    offsets_.push_back(parameter_count_);
    parameter_count_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
}

std::pair<int, int> ReluNetwork::block(int layer) const {
  const auto l = static_cast<std::size_t>(layer);
  return {offsets_[l], sizes_[l + 1] * sizes_[l] + sizes_[l + 1]};
}

Eigen::MatrixXd ReluNetwork::forward(const Point& theta, const Eigen::MatrixXd& inputs) const {
  require_dim(theta, parameter_count_, "ReluNetwork::forward");
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l < layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const auto w = weights_view(theta, offsets_[l], out, in);
    const auto b = theta.segment(offsets_[l] + out * in, out);
    Eigen::MatrixXd z = w * h;
    z.colwise() += b;
    h = (l + 1 < layers()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

double ReluNetwork::min_abs_preactivation(const Point& theta, const Eigen::MatrixXd& inputs) const {
  double smallest = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l + 1 < layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::MatrixXd z = weights_view(theta, offsets_[l], out, in) * h;
    z.colwise() += theta.segment(offsets_[l] + out * in, out);
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    h = z.cwiseMax(0.0);
  }
  return smallest;
}

double ReluNetwork::squared_error_and_gradient(const Point& theta, const Dataset& data,
                                               Point* grad) const {
  require_dim(theta, parameter_count_, "ReluNetwork::squared_error_and_gradient");
  std::vector<Eigen::MatrixXd> activations;  // inputs to each layer
  std::vector<Eigen::MatrixXd> preacts;
  activations.push_back(data.inputs);
  for (int l = 0; l < layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::MatrixXd z = weights_view(theta, offsets_[l], out, in) * activations.back();
    z.colwise() += theta.segment(offsets_[l] + out * in, out);
    preacts.push_back(z);
    if (l + 1 < layers()) activations.push_back(z.cwiseMax(0.0));
  }
  const Eigen::MatrixXd residual = preacts.back() - data.outputs;
  const double value = 0.5 * residual.squaredNorm();
  if (!grad) return value;

  grad->setZero(parameter_count_);
  Eigen::MatrixXd delta = residual;
  for (int l = layers() - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    Eigen::Map<Eigen::MatrixXd> gw(grad->data() + offsets_[l], out, in);
    gw.noalias() = delta * activations[static_cast<std::size_t>(l)].transpose();
    grad->segment(offsets_[l] + out * in, out) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights_view(theta, offsets_[l], out, in).transpose() * delta;
      const auto& z = preacts[static_cast<std::size_t>(l - 1)];
      delta = back.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    }
  }
  return value;
}

ToyBnnPosterior::ToyBnnPosterior(ReluNetwork network, Dataset train, double noise_std)
    : EnergyTarget(network.parameter_count()),
      network_(std::move(network)),
      train_(std::move(train)),
      noise_std_(noise_std) {
  require(noise_std_ > 0.0, "ToyBnnPosterior: noise_std must be positive");
  require(train_.inputs.rows() == network_.layer_sizes().front() || train_.size() == 0,
          "ToyBnnPosterior: input dimension mismatch");
  require(train_.outputs.cols() == train_.inputs.cols(),
          "ToyBnnPosterior: inputs and outputs must have the same count");
  prior_std_.resize(dim());
  double log_prior_norm = 0.0;
  for (int l = 0; l < network_.layers(); ++l) {
    const auto [offset, length] = network_.block(l);
    const double s = 1.0 / std::sqrt(static_cast<double>(network_.fan_in(l)));
    prior_std_.segment(offset, length).setConstant(s);
    log_prior_norm += length * std::log(s);
  }
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const double n_obs = static_cast<double>(train_.outputs.size());
  constant_ = 0.5 * dim() * log2pi + log_prior_norm +
              n_obs * (0.5 * log2pi + std::log(noise_std_));
}

double ToyBnnPosterior::evaluate(const Point& theta, Point* grad) const {
  const Point scaled = theta.cwiseQuotient(prior_std_);
  double value = 0.5 * scaled.squaredNorm() + constant_;
  const double inv_noise_var = 1.0 / (noise_std_ * noise_std_);
  if (train_.size() > 0) {
    value += inv_noise_var * network_.squared_error_and_gradient(theta, train_, grad);
    if (grad) *grad *= inv_noise_var;
  } else if (grad) {
    grad->setZero(dim());
  }
  if (grad) *grad += scaled.cwiseQuotient(prior_std_);
  return value;
}

double ToyBnnPosterior::compute_energy(const Point& theta) const { return evaluate(theta, nullptr); }

double ToyBnnPosterior::compute_energy_and_gradient(const Point& theta, Point& grad) const {
  return evaluate(theta, &grad);
}

double ToyBnnPosterior::predictive_nll(const std::vector<Point>& samples, const Dataset& test) const {
  require(!samples.empty(), "predictive_nll: no samples");
  require(test.size() > 0, "predictive_nll: empty test set");
  const double var = noise_std_ * noise_std_;
  const double d_y = static_cast<double>(test.outputs.rows());
  const double log_norm = -0.5 * d_y * std::log(2.0 * std::numbers::pi * var);
  Eigen::MatrixXd log_lik(static_cast<Eigen::Index>(samples.size()), test.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Eigen::MatrixXd pred = network_.forward(samples[s], test.inputs);
    log_lik.row(static_cast<Eigen::Index>(s)) =
        (log_norm - 0.5 * (pred - test.outputs).colwise().squaredNorm().array() / var).matrix();
  }
  double total = 0.0;
  std::vector<double> column(samples.size());
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) column[s] = log_lik(static_cast<Eigen::Index>(s), i);
    total -= log_sum_exp(column) - std::log(static_cast<double>(samples.size()));
  }
  return total / static_cast<double>(test.size());
}

Point sample_bnn_prior(const ReluNetwork& network, Rng& rng) {
  Point theta(network.parameter_count());
  for (int l = 0; l < network.layers(); ++l) {
    const auto [offset, length] = network.block(l);
    const double s = 1.0 / std::sqrt(static_cast<double>(network.fan_in(l)));
    for (int j = 0; j < length; ++j) theta(offset + j) = s * rng.normal();
  }
  return theta;
}

BnnProblem make_bnn_problem(std::vector<int> layer_sizes, int n_train, int n_test, double noise_std,
                            std::uint64_t seed) {
  require(n_train >= 0 && n_test >= 0, "make_bnn_problem: data set sizes must be non-negative");
  BnnProblem problem;
  problem.layer_sizes = layer_sizes;
  problem.noise_std = noise_std;
  const ReluNetwork network(std::move(layer_sizes));
  Rng rng(seed);
  Rng prior_rng = rng.split(0);
  problem.theta_star = sample_bnn_prior(network, prior_rng);
  const int d_x = network.layer_sizes().front();
  const int d_y = network.layer_sizes().back();
  auto make = [&](int n, Rng r) {
    Dataset data;
    data.inputs.resize(d_x, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d_x; ++j) data.inputs(j, i) = r.normal();
    data.outputs = network.forward(problem.theta_star, data.inputs);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d_y; ++j) data.outputs(j, i) += noise_std * r.normal();
    return data;
  };
  problem.train = make(n_train, rng.split(1));
  problem.test = make(n_test, rng.split(2));
  return problem;
}

}  // namespace digs
