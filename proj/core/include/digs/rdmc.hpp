#pragma once

#include "digs/chain.hpp"
#include "digs/kernels.hpp"

namespace digs {

struct RdmcConfig {
  int steps = 1;              // T outer steps
  double total_time = 0.1;    // Gamma
  int posterior_samples = 5;  // K
  int ula_steps = 5;          // L_ULA
  double ula_step_size = 1e-2;
  int is_samples = 100;       // S_is
};

void validate(const RdmcConfig& cfg);

/// Noise level at outer step t (0-based): a_t = exp(-(Gamma - t eta)),
/// sigma_t = sqrt(1 - a_t^2), eta = Gamma / T.
ConvolutionKernel rdmc_kernel(const RdmcConfig& cfg, int t);

/// Monte Carlo noisy score, (a mean(x0) - x_t) / sigma^2.
Point rdmc_score_estimate(const PointSet& posterior_samples, const Point& x_t, const ConvolutionKernel& kernel);

/// Energy queries per kept sample: T K (L_ULA + S_is) + L_ULA.
std::uint64_t rdmc_cost_per_sample(const RdmcConfig& cfg);

/// Reverse-diffusion Monte Carlo; every sample starts from the VP prior.
SamplerRun rdmc_run(const EnergyTarget& target, const RdmcConfig& cfg, int n_samples, Rng& rng,
                    RunBudget budget = {});

}  // namespace digs
