#pragma once

#include <vector>

#include "digs/chain.hpp"

namespace digs {

struct PtConfig {
  std::vector<double> temperatures{1.0, 5.62, 31.62, 177.83, 1000.0};
  HmcConfig inner;
  /// Per-chain HMC step sizes; empty means inner.step_size * sqrt(tau).
  std::vector<double> step_sizes;
  /// HMC iterations between swap rounds; 0 means one round per kept sample.
  int swap_interval = 0;
};

void validate(const PtConfig& cfg);
double chain_step_size(const PtConfig& cfg, std::size_t chain);

/// log of the replica-exchange acceptance for chains at inverse temperatures
/// beta_i, beta_j holding states with base energies e_i, e_j.
double pt_swap_log_acceptance(double beta_i, double beta_j, double e_i, double e_j);

/// Replica exchange over tempered copies of `target`; the tau = 1 chain is
/// the output. Query cost: C * (1 + n * iterations_per_sample * leapfrog_steps).
SamplerRun pt_run(const EnergyTarget& target, const PtConfig& cfg, int n_samples, const Point& x0, Rng& rng,
                  RunBudget budget = {});

}  // namespace digs
