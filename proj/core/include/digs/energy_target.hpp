#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "digs/point.hpp"

namespace digs {

/// Snapshot of a target's evaluation counters.
///
/// `energy` and `gradient` count calls that produced that quantity;
/// `queries` counts oracle calls at a point, so a joint energy+gradient call
/// bumps all three by one. `queries` is the cost unit used for budgets.
struct EvalCounts {
  std::uint64_t energy = 0;
  std::uint64_t gradient = 0;
  std::uint64_t queries = 0;

  EvalCounts operator-(const EvalCounts& o) const {
    return {energy - o.energy, gradient - o.gradient, queries - o.queries};
  }
  EvalCounts& operator+=(const EvalCounts& o) {
    energy += o.energy;
    gradient += o.gradient;
    queries += o.queries;
    return *this;
  }
  bool operator==(const EvalCounts&) const = default;
};

/// Energy-function contract: E(x) = -log p(x) + const, lower bounded and
/// differentiable. Implementations are immutable after construction except
/// for the counters, which are atomic so parallel chains may share a target.
class EnergyTarget {
 public:
  virtual ~EnergyTarget() = default;
  EnergyTarget(const EnergyTarget&) = delete;
  EnergyTarget& operator=(const EnergyTarget&) = delete;

  int dim() const { return dim_; }
  virtual std::string name() const = 0;

  double energy(const Point& x) const;
  Point gradient(const Point& x) const;
  /// Energy and gradient from one oracle query.
  double energy_and_gradient(const Point& x, Point& grad) const;

  /// Score function, -grad E. Counts as a gradient call.
  Point score(const Point& x) const { return -gradient(x); }

  EvalCounts counts() const;
  void reset_counts() const;

 protected:
  explicit EnergyTarget(int dim);

  virtual double compute_energy(const Point& x) const = 0;
  virtual double compute_energy_and_gradient(const Point& x, Point& grad) const = 0;
  virtual Point compute_gradient(const Point& x) const {
    Point g;
    compute_energy_and_gradient(x, g);
    return g;
  }

 private:
  int dim_;
  mutable std::atomic<std::uint64_t> energy_calls_{0};
  mutable std::atomic<std::uint64_t> gradient_calls_{0};
  mutable std::atomic<std::uint64_t> queries_{0};
};

using TargetPtr = std::shared_ptr<const EnergyTarget>;

/// p_beta(x) ∝ exp(-beta E(x)). Delegates to (and counts against) the base.
class TemperedTarget final : public EnergyTarget {
 public:
  TemperedTarget(const EnergyTarget& base, double beta);

  std::string name() const override;
  double beta() const { return beta_; }
  const EnergyTarget& base() const { return base_; }

 protected:
  double compute_energy(const Point& x) const override;
  double compute_energy_and_gradient(const Point& x, Point& grad) const override;
  Point compute_gradient(const Point& x) const override;

 private:
  const EnergyTarget& base_;
  double beta_;
};

/// Unnormalized tempered log density, -beta E(x).
double tempered_log_density(const EnergyTarget& target, double beta, const Point& x);

}  // namespace digs
