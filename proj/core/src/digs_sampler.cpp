#include "digs/digs_sampler.hpp"

#include <cmath>
#include <numbers>

#include "digs/error.hpp"

namespace digs {

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::prev_state: return "prev_state";
    case InitStrategy::scaled_noisy: return "scaled_noisy";
    case InitStrategy::mh: return "mh";
  }
  return "?";
}

std::string to_string(DenoiserKind k) {
  switch (k) {
    case DenoiserKind::mala: return "mala";
    case DenoiserKind::ula: return "ula";
    case DenoiserKind::hmc: return "hmc";
  }
  return "?";
}

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "prev_state") return InitStrategy::prev_state;
  if (s == "scaled_noisy") return InitStrategy::scaled_noisy;
  if (s == "mh") return InitStrategy::mh;
  throw ConfigError("unknown init strategy '" + s + "'");
}

DenoiserKind denoiser_from_string(const std::string& s) {
  if (s == "mala") return DenoiserKind::mala;
  if (s == "ula") return DenoiserKind::ula;
  if (s == "hmc") return DenoiserKind::hmc;
  throw ConfigError("unknown denoiser '" + s + "'");
}

bool validate(const DigsConfig& cfg) {
  require(!cfg.schedule.levels.empty(), "DigsConfig: empty schedule");
  bool outside_standard = false;
  for (const auto& k : cfg.schedule.levels)
    outside_standard |= validate_kernel(k, cfg.sweep_mode ? KernelDomain::sweep : KernelDomain::standard);
  require(cfg.sweeps >= 1, "DigsConfig: sweeps must be at least 1");
  require(cfg.denoise_steps >= 1, "DigsConfig: denoise_steps must be at least 1");
  require(cfg.denoiser.step_size > 0.0, "DigsConfig: denoiser step size must be positive");
  require(cfg.denoiser.leapfrog_steps >= 1, "DigsConfig: leapfrog_steps must be at least 1");
  require(cfg.denoiser.mass > 0.0, "DigsConfig: mass must be positive");
  return outside_standard;
}

namespace {

/// log N(x | x~/alpha, (sigma/alpha)^2 I).
double log_init_proposal(const Point& x, const Point& x_tilde, const ConvolutionKernel& k) {
  const double s = k.sigma / k.alpha;
  const double d = static_cast<double>(x.size());
  return -(x - x_tilde / k.alpha).squaredNorm() / (2.0 * s * s) - 0.5 * d * std::log(2.0 * std::numbers::pi * s * s);
}

}  // namespace

double digs_mh_log_ratio(double energy_prev, const Point& x_prev, double energy_prop, const Point& x_prop,
                         const Point& x_tilde, const ConvolutionKernel& kernel) {
  const double num = -energy_prop + log_kernel_density(x_tilde, x_prop, kernel) +
                     log_init_proposal(x_prev, x_tilde, kernel);
  const double den = -energy_prev + log_kernel_density(x_tilde, x_prev, kernel) +
                     log_init_proposal(x_prop, x_tilde, kernel);
  return num - den;
}

bool digs_mh_init(ChainState& state, const DenoisingPosterior& dp, Rng& rng) {
  const auto& k = dp.kernel();
  require(k.alpha > 0.0, "digs_mh_init: alpha must be positive");
  const Point proposal = dp.x_tilde() / k.alpha + (k.sigma / k.alpha) * rng.normal_vector(state.x.size());
  return digs_mh_init_with(state, dp, proposal, rng.uniform());
}

bool digs_mh_init_with(ChainState& state, const DenoisingPosterior& dp, const Point& proposal, double uniform) {
  require(state.has_energy(), "digs_mh_init: state has no cached energy");
  ChainState next;
  next.x = proposal;
  next.energy = dp.base().energy_and_gradient(next.x, next.grad);
  const double log_a = digs_mh_log_ratio(state.energy, state.x, next.energy, next.x, dp.x_tilde(), dp.kernel());
  if (std::isfinite(next.energy) && std::log(uniform) < log_a) {
    state = std::move(next);
    return true;
  }
  return false;
}

void digs_sweep(ChainState& state, const EnergyTarget& target, const ConvolutionKernel& kernel, int denoise_steps,
                InitStrategy init, const DenoiserConfig& denoiser, Rng& rng, DigsLevelStats* stats) {
  require(denoise_steps >= 1, "digs_sweep: need at least one denoising step");
  const DenoisingPosterior dp(target, kernel, corrupt(state.x, kernel, rng));

  switch (init) {
    case InitStrategy::prev_state:
      break;
    case InitStrategy::scaled_noisy:
      state = make_state(target, dp.x_tilde() / kernel.alpha);
      break;
    case InitStrategy::mh: {
      const bool ok = digs_mh_init(state, dp, rng);
      if (stats) stats->init.record(ok);
      break;
    }
  }

  ChainState post{state.x, state.energy + dp.tether(state.x), state.grad + dp.tether_gradient(state.x)};
  const HmcConfig hmc{denoiser.step_size, denoiser.leapfrog_steps, denoiser.mass, 1};
  for (int i = 0; i < denoise_steps; ++i) {
    switch (denoiser.kind) {
      case DenoiserKind::mala: {
        const bool ok = mala_step(post, dp, denoiser.step_size, rng);
        if (stats) stats->denoise.record(ok);
        break;
      }
      case DenoiserKind::ula:
        ula_step(post, dp, denoiser.step_size, rng, true);
        break;
      case DenoiserKind::hmc: {
        const bool ok = hmc_step(post, dp, hmc, rng);
        if (stats) stats->denoise.record(ok);
        break;
      }
    }
  }
  state.energy = post.energy - dp.tether(post.x);
  state.grad = post.grad - dp.tether_gradient(post.x);
  state.x = std::move(post.x);
}

std::uint64_t digs_sweep_cost(const DigsConfig& cfg) {
  const std::uint64_t step = cfg.denoiser.kind == DenoiserKind::hmc ? cfg.denoiser.leapfrog_steps : 1;
  const std::uint64_t init = cfg.init == InitStrategy::prev_state ? 0 : 1;
  return static_cast<std::uint64_t>(cfg.denoise_steps) * step + init;
}

SamplerRun digs_run(const EnergyTarget& target, const DigsConfig& cfg, int n_samples, const Point& x0, Rng& rng,
                    RunBudget budget) {
  const bool outside_standard = validate(cfg);
  RunRecorder rec(target, "digs", budget);
  if (outside_standard) rec.run().warnings.push_back("kernel outside the standard domain (sweep mode)");
  ChainState state = make_state(target, x0);
  std::vector<DigsLevelStats> stats(cfg.schedule.size());
  for (int s = 0; s < n_samples; ++s) {
    for (std::size_t l = 0; l < cfg.schedule.size(); ++l) {
      for (int k = 0; k < cfg.sweeps; ++k)
        digs_sweep(state, target, cfg.schedule.levels[l], cfg.denoise_steps, cfg.init, cfg.denoiser, rng, &stats[l]);
    }
    if (!rec.keep(state.x)) break;
  }
  auto& acc = rec.run().acceptance;
  for (std::size_t l = 0; l < stats.size(); ++l) {
    if (cfg.init == InitStrategy::mh) acc["mh_init"] += stats[l].init;
    if (cfg.denoiser.kind != DenoiserKind::ula) acc["denoise"] += stats[l].denoise;
    if (stats.size() > 1) {
      const std::string tag = "@level" + std::to_string(l);
      if (cfg.init == InitStrategy::mh) acc["mh_init" + tag] = stats[l].init;
      if (cfg.denoiser.kind != DenoiserKind::ula) acc["denoise" + tag] = stats[l].denoise;
    }
  }
  return rec.finish();
}

}  // namespace digs
