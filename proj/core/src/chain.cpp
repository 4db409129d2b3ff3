#include "digs/chain.hpp"

#include <cmath>

namespace digs {

ChainState make_state(const EnergyTarget& target, Point x) {
  require(x.allFinite(), "make_state: initial point must be finite");
  ChainState s;
  s.energy = target.energy_and_gradient(x, s.grad);
  s.x = std::move(x);
  return s;
}

RunRecorder::RunRecorder(const EnergyTarget& target, std::string sampler, RunBudget budget)
    : target_(target), budget_(budget), start_(target.counts()), t0_(std::chrono::steady_clock::now()) {
  run_.sampler = std::move(sampler);
}

bool RunRecorder::keep(const Point& x) {
  if (budget_.max_queries && (target_.counts() - start_).queries > *budget_.max_queries) {
    run_.truncated = true;
    return false;
  }
  run_.samples.push_back(x);
  return true;
}

SamplerRun RunRecorder::finish() {
  run_.counts = target_.counts() - start_;
  run_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  return std::move(run_);
}

// ---------------------------------------------------------------- ULA

void ula_step(ChainState& state, const EnergyTarget& target, double eta, Rng& rng, bool track_energy) {
  thread_local Point eps;
  eps.resize(state.x.size());
  rng.fill_normal(eps);
  ula_step_with_noise(state, target, eta, eps, track_energy);
}

void ula_step_with_noise(ChainState& state, const EnergyTarget& target, double eta, const Point& eps,
                         bool track_energy) {
  require(eta > 0.0, "ula_step: step size must be positive");
  state.x += -eta * state.grad + std::sqrt(2.0 * eta) * eps;
  if (track_energy) {
    state.energy = target.energy_and_gradient(state.x, state.grad);
  } else {
    state.grad = target.gradient(state.x);
    state.energy = std::numeric_limits<double>::quiet_NaN();
  }
}

// ---------------------------------------------------------------- MALA

double mala_log_proposal(const Point& to, const Point& from, const Point& grad_from, double eta) {
  return -(to - from + eta * grad_from).squaredNorm() / (4.0 * eta);
}

double mala_log_acceptance(const ChainState& current, const ChainState& proposal, double eta) {
  return (current.energy - proposal.energy) +
         mala_log_proposal(current.x, proposal.x, proposal.grad, eta) -
         mala_log_proposal(proposal.x, current.x, current.grad, eta);
}

bool mala_step(ChainState& state, const EnergyTarget& target, double eta, Rng& rng) {
  thread_local Point eps;
  eps.resize(state.x.size());
  rng.fill_normal(eps);
  return mala_step_with(state, target, eta, eps, rng.uniform());
}

bool mala_step_with(ChainState& state, const EnergyTarget& target, double eta, const Point& eps,
                    double uniform) {
  require(eta > 0.0, "mala_step: step size must be positive");
  require(state.has_energy(), "mala_step: state has no cached energy");
  thread_local ChainState proposal;
  proposal.x = state.x - eta * state.grad + std::sqrt(2.0 * eta) * eps;
  proposal.energy = target.energy_and_gradient(proposal.x, proposal.grad);
  const double log_a = mala_log_acceptance(state, proposal, eta);
  if (std::isfinite(proposal.energy) && std::log(uniform) < log_a) {
    std::swap(state, proposal);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------- HMC

void validate(const HmcConfig& cfg) {
  require(cfg.step_size > 0.0, "HmcConfig: step size must be positive");
  require(cfg.leapfrog_steps >= 1, "HmcConfig: leapfrog_steps must be at least 1");
  require(cfg.mass > 0.0, "HmcConfig: mass must be positive");
  require(cfg.iterations_per_sample >= 1, "HmcConfig: iterations_per_sample must be at least 1");
}

void leapfrog_cached(ChainState& state, Point& v, const EnergyTarget& target, double eps, int steps,
                     double mass) {
  require(eps > 0.0, "leapfrog: step size must be positive");
  require(steps >= 1, "leapfrog: need at least one step");
  for (int i = 0; i < steps; ++i) {
    v.noalias() -= (0.5 * eps) * state.grad;
    state.x.noalias() += (eps / mass) * v;
    state.energy = target.energy_and_gradient(state.x, state.grad);
    v.noalias() -= (0.5 * eps) * state.grad;
  }
}

std::pair<Point, Point> leapfrog(const Point& x, const Point& v, const EnergyTarget& target, double eps,
                                 int steps, double mass) {
  require(mass > 0.0, "leapfrog: mass must be positive");
  ChainState state = make_state(target, x);
  Point momentum = v;
  leapfrog_cached(state, momentum, target, eps, steps, mass);
  return {state.x, momentum};
}

bool hmc_step(ChainState& state, const EnergyTarget& target, const HmcConfig& cfg, Rng& rng) {
  thread_local Point momentum;
  momentum.resize(state.x.size());
  rng.fill_normal(momentum);
  momentum *= std::sqrt(cfg.mass);
  return hmc_step_with(state, target, cfg, momentum, rng.uniform());
}

bool hmc_step_with(ChainState& state, const EnergyTarget& target, const HmcConfig& cfg,
                   const Point& momentum, double uniform) {
  require(state.has_energy(), "hmc_step: state has no cached energy");
  thread_local ChainState proposal;
  thread_local Point v;
  proposal.x = state.x;
  proposal.energy = state.energy;
  proposal.grad = state.grad;
  v = momentum;
  const double h0 = state.energy + 0.5 * momentum.squaredNorm() / cfg.mass;
  leapfrog_cached(proposal, v, target, cfg.step_size, cfg.leapfrog_steps, cfg.mass);
  const double h1 = proposal.energy + 0.5 * v.squaredNorm() / cfg.mass;
  if (std::isfinite(h1) && std::log(uniform) < h0 - h1) {
    std::swap(state, proposal);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------- plain runs

SamplerRun run_ula(const EnergyTarget& target, const UlaConfig& cfg, int n_samples, const Point& x0,
                   Rng& rng, RunBudget budget) {
  require(cfg.step_size > 0.0 && cfg.steps_per_sample >= 1, "run_ula: invalid config");
  RunRecorder rec(target, "ula", budget);
  ChainState state;
  state.x = x0;
  state.grad = target.gradient(x0);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < cfg.steps_per_sample; ++i) ula_step(state, target, cfg.step_size, rng);
    if (!rec.keep(state.x)) break;
  }
  return rec.finish();
}

SamplerRun run_mala(const EnergyTarget& target, const MalaConfig& cfg, int n_samples,
                    const Point& x0, Rng& rng, RunBudget budget) {
  require(cfg.step_size > 0.0 && cfg.steps_per_sample >= 1, "run_mala: invalid config");
  RunRecorder rec(target, "mala", budget);
  ChainState state = make_state(target, x0);
  auto& acc = rec.run().acceptance["mala"];
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < cfg.steps_per_sample; ++i) acc.record(mala_step(state, target, cfg.step_size, rng));
    if (!rec.keep(state.x)) break;
  }
  return rec.finish();
}

SamplerRun run_hmc(const EnergyTarget& target, const HmcConfig& cfg, int n_samples, const Point& x0,
                   Rng& rng, RunBudget budget) {
  validate(cfg);
  RunRecorder rec(target, "hmc", budget);
  ChainState state = make_state(target, x0);
  auto& acc = rec.run().acceptance["hmc"];
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < cfg.iterations_per_sample; ++i) acc.record(hmc_step(state, target, cfg, rng));
    if (!rec.keep(state.x)) break;
  }
  return rec.finish();
}

}  // namespace digs
