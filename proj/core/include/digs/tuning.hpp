#pragma once

#include <functional>

#include "digs/chain.hpp"

namespace digs {

struct TuneOptions {
  double target = 0.574;
  double tolerance = 0.05;
  int pilot_queries = 2000;  // gradient queries per pilot run
  int max_rounds = 40;
};

struct TuneResult {
  double step_size = 0.0;
  double acceptance = 0.0;
  int rounds = 0;
  bool converged = false;
  EvalCounts counts;
};

/// Bisection in log step size on a decreasing acceptance curve. Stops after two
/// consecutive pilots at one step size land within tolerance.
/// `pilot(step)` runs one pilot and returns its acceptance rate.
TuneResult tune_step_size(const std::function<double(double)>& pilot, double initial, const TuneOptions& opt);

/// Pilots continue the same chain so later rounds start from a warmed-up state.
TuneResult tune_mala(const EnergyTarget& target, const Point& x0, double initial, Rng& rng,
                     TuneOptions opt = {});
TuneResult tune_hmc(const EnergyTarget& target, const Point& x0, const HmcConfig& cfg, Rng& rng,
                    TuneOptions opt = {0.65});

}  // namespace digs
