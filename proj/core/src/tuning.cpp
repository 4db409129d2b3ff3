#include "digs/tuning.hpp"

#include <algorithm>
#include <cmath>

namespace digs {

TuneResult tune_step_size(const std::function<double(double)>& pilot, double initial, const TuneOptions& opt) {
  require(initial > 0.0, "tune_step_size: initial step must be positive");
  require(opt.target > 0.0 && opt.target < 1.0, "tune_step_size: target must lie in (0, 1)");
  TuneResult r;
  double lo = 0.0, hi = 0.0;  // log steps with acceptance above / below target
  bool have_lo = false, have_hi = false;
  double log_step = std::log(initial);
  bool hit = false;
  for (r.rounds = 1; r.rounds <= opt.max_rounds; ++r.rounds) {
    const double acc = pilot(std::exp(log_step));
    r.step_size = std::exp(log_step);
    r.acceptance = acc;
    if (std::abs(acc - opt.target) <= opt.tolerance) {
      // A hit from a chain still drifting toward the bulk is confirmed by a second pilot.
      if (hit) {
        r.converged = true;
        break;
      }
      hit = true;
      continue;
    }
    hit = false;
    if (acc > opt.target) {
      lo = log_step;
      have_lo = true;
    } else {
      hi = log_step;
      have_hi = true;
    }
    if (have_lo && have_hi)
      log_step = 0.5 * (lo + hi);
    else
      log_step += have_lo ? std::log(4.0) : -std::log(4.0);
  }
  r.rounds = std::min(r.rounds, opt.max_rounds);
  return r;
}

TuneResult tune_mala(const EnergyTarget& target, const Point& x0, double initial, Rng& rng, TuneOptions opt) {
  const EvalCounts start = target.counts();
  ChainState state = make_state(target, x0);
  auto pilot = [&](double eta) {
    AcceptanceCounter acc;
    for (int i = 0; i < opt.pilot_queries; ++i) acc.record(mala_step(state, target, eta, rng));
    return acc.rate();
  };
  TuneResult r = tune_step_size(pilot, initial, opt);
  r.counts = target.counts() - start;
  return r;
}

TuneResult tune_hmc(const EnergyTarget& target, const Point& x0, const HmcConfig& cfg, Rng& rng, TuneOptions opt) {
  validate(cfg);
  const EvalCounts start = target.counts();
  ChainState state = make_state(target, x0);
  const int iterations = std::max(50, opt.pilot_queries / cfg.leapfrog_steps);
  auto pilot = [&](double eps) {
    HmcConfig c = cfg;
    c.step_size = eps;
    AcceptanceCounter acc;
    for (int i = 0; i < iterations; ++i) acc.record(hmc_step(state, target, c, rng));
    return acc.rate();
  };
  TuneResult r = tune_step_size(pilot, cfg.step_size, opt);
  r.counts = target.counts() - start;
  return r;
}

}  // namespace digs
