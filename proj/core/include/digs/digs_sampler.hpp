#pragma once

#include <string>
#include <vector>

#include "digs/chain.hpp"
#include "digs/kernels.hpp"

namespace digs {

enum class InitStrategy { prev_state, scaled_noisy, mh };
enum class DenoiserKind { mala, ula, hmc };

std::string to_string(InitStrategy s);
std::string to_string(DenoiserKind k);
InitStrategy init_strategy_from_string(const std::string& s);
DenoiserKind denoiser_from_string(const std::string& s);

/// Sampler run on the denoising posterior. For hmc each denoising step is
/// one HMC iteration of `leapfrog_steps` leapfrog steps.
struct DenoiserConfig {
  DenoiserKind kind = DenoiserKind::mala;
  double step_size = 1e-3;
  int leapfrog_steps = 1;
  double mass = 1.0;
};

struct DigsConfig {
  NoiseSchedule schedule = single_level({1.0, 1.0});
  int sweeps = 1;         // K per level
  int denoise_steps = 1;  // L per sweep
  DenoiserConfig denoiser;
  InitStrategy init = InitStrategy::mh;
  /// Allow kernels outside the standard domain (hyperparameter sweeps).
  bool sweep_mode = false;
};

/// Returns true when some kernel is only valid in sweep mode.
bool validate(const DigsConfig& cfg);

struct DigsLevelStats {
  AcceptanceCounter init;
  AcceptanceCounter denoise;
};

/// log of the Metropolis-within-Gibbs acceptance for moving x_prev -> x_prop
/// with the proposal N(x~/alpha, (sigma/alpha)^2 I).
double digs_mh_log_ratio(double energy_prev, const Point& x_prev, double energy_prop, const Point& x_prop,
                         const Point& x_tilde, const ConvolutionKernel& kernel);

/// Metropolis-within-Gibbs initialization. `state` holds base-target energy
/// and gradient at x_prev; on acceptance it is replaced by the proposal.
/// Exactly one base query.
bool digs_mh_init(ChainState& state, const DenoisingPosterior& dp, Rng& rng);
bool digs_mh_init_with(ChainState& state, const DenoisingPosterior& dp, const Point& proposal, double uniform);

/// One Gibbs sweep: corrupt, initialize, then L denoising steps. `state`
/// carries base-target energy and gradient in and out.
/// Query cost: L * (leapfrog_steps for hmc, else 1) + (0 for prev_state, else 1).
void digs_sweep(ChainState& state, const EnergyTarget& target, const ConvolutionKernel& kernel, int denoise_steps,
                InitStrategy init, const DenoiserConfig& denoiser, Rng& rng, DigsLevelStats* stats = nullptr);

/// Query cost of one sweep under `cfg`.
std::uint64_t digs_sweep_cost(const DigsConfig& cfg);

/// Multi-level DiGS: for every kept sample, K sweeps per level from the
/// coarsest kernel to the finest. Query cost: 1 + n * |levels| * K * sweep cost.
SamplerRun digs_run(const EnergyTarget& target, const DigsConfig& cfg, int n_samples, const Point& x0, Rng& rng,
                    RunBudget budget = {});

}  // namespace digs
