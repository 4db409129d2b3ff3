#include "digs/energy_target.hpp"

namespace digs {

EnergyTarget::EnergyTarget(int dim) : dim_(dim) {
  require(dim >= 1, "EnergyTarget: dimension must be at least 1");
}

double EnergyTarget::energy(const Point& x) const {
  require_dim(x, dim_, "energy");
  energy_calls_.fetch_add(1, std::memory_order_relaxed);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return compute_energy(x);
}

Point EnergyTarget::gradient(const Point& x) const {
  require_dim(x, dim_, "gradient");
  gradient_calls_.fetch_add(1, std::memory_order_relaxed);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return compute_gradient(x);
}

double EnergyTarget::energy_and_gradient(const Point& x, Point& grad) const {
  require_dim(x, dim_, "energy_and_gradient");
  energy_calls_.fetch_add(1, std::memory_order_relaxed);
  gradient_calls_.fetch_add(1, std::memory_order_relaxed);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return compute_energy_and_gradient(x, grad);
}

EvalCounts EnergyTarget::counts() const {
  return {energy_calls_.load(std::memory_order_relaxed),
          gradient_calls_.load(std::memory_order_relaxed),
          queries_.load(std::memory_order_relaxed)};
}

void EnergyTarget::reset_counts() const {
  energy_calls_.store(0);
  gradient_calls_.store(0);
  queries_.store(0);
}

TemperedTarget::TemperedTarget(const EnergyTarget& base, double beta)
    : EnergyTarget(base.dim()), base_(base), beta_(beta) {
  require(beta > 0.0, "TemperedTarget: beta must be positive");
}

std::string TemperedTarget::name() const {
  return base_.name() + "@beta=" + std::to_string(beta_);
}

double TemperedTarget::compute_energy(const Point& x) const { return beta_ * base_.energy(x); }

double TemperedTarget::compute_energy_and_gradient(const Point& x, Point& grad) const {
  const double e = base_.energy_and_gradient(x, grad);
  grad *= beta_;
  return beta_ * e;
}

Point TemperedTarget::compute_gradient(const Point& x) const { return beta_ * base_.gradient(x); }

double tempered_log_density(const EnergyTarget& target, double beta, const Point& x) {
  require(beta > 0.0, "tempered_log_density: beta must be positive");
  return -beta * target.energy(x);
}

}  // namespace digs
