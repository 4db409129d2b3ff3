#include "digs/parallel_tempering.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace digs {

void validate(const PtConfig& cfg) {
  validate(cfg.inner);
  require(!cfg.temperatures.empty(), "PtConfig: empty temperature ladder");
  require(cfg.temperatures.front() == 1.0, "PtConfig: ladder must start at tau = 1");
  for (std::size_t i = 1; i < cfg.temperatures.size(); ++i)
    require(cfg.temperatures[i] > cfg.temperatures[i - 1], "PtConfig: ladder must be strictly increasing");
  require(cfg.step_sizes.empty() || cfg.step_sizes.size() == cfg.temperatures.size(),
          "PtConfig: one step size per chain");
  for (double s : cfg.step_sizes) require(s > 0.0, "PtConfig: step sizes must be positive");
  require(cfg.swap_interval >= 0, "PtConfig: swap_interval must be non-negative");
}

double chain_step_size(const PtConfig& cfg, std::size_t chain) {
  if (!cfg.step_sizes.empty()) return cfg.step_sizes[chain];
  return cfg.inner.step_size * std::sqrt(cfg.temperatures[chain]);
}

double pt_swap_log_acceptance(double beta_i, double beta_j, double e_i, double e_j) {
  return (beta_i - beta_j) * (e_i - e_j);
}

SamplerRun pt_run(const EnergyTarget& target, const PtConfig& cfg, int n_samples, const Point& x0, Rng& rng,
                  RunBudget budget) {
  validate(cfg);
  const std::size_t C = cfg.temperatures.size();
  RunRecorder rec(target, "pt", budget);

  std::vector<std::unique_ptr<TemperedTarget>> tempered;
  std::vector<ChainState> states;
  std::vector<HmcConfig> hmc(C, cfg.inner);
  std::vector<Rng> rngs;
  std::vector<AcceptanceCounter*> move_acc;
  std::vector<AcceptanceCounter*> swap_acc;
  for (std::size_t c = 0; c < C; ++c) {
    tempered.push_back(std::make_unique<TemperedTarget>(target, 1.0 / cfg.temperatures[c]));
    states.push_back(make_state(*tempered[c], x0));
    hmc[c].step_size = chain_step_size(cfg, c);
    rngs.push_back(rng.split(c));
    move_acc.push_back(&rec.run().acceptance["hmc_chain" + std::to_string(c)]);
    if (c + 1 < C) swap_acc.push_back(&rec.run().acceptance["swap_" + std::to_string(c) + "_" + std::to_string(c + 1)]);
  }
  Rng swap_rng = rng.split(C);
  const int interval = cfg.swap_interval > 0 ? cfg.swap_interval : cfg.inner.iterations_per_sample;
  std::uint64_t round = 0;
  int since_swap = 0;

  auto swap_round = [&] {
    for (std::size_t i = round % 2; i + 1 < C; i += 2) {
      const double bi = tempered[i]->beta(), bj = tempered[i + 1]->beta();
      const double ei = states[i].energy / bi, ej = states[i + 1].energy / bj;
      const bool ok = std::log(swap_rng.uniform()) < pt_swap_log_acceptance(bi, bj, ei, ej);
      swap_acc[i]->record(ok);
      if (!ok) continue;
      Point gi = states[i].grad / bi, gj = states[i + 1].grad / bj;
      std::swap(states[i].x, states[i + 1].x);
      states[i].energy = bi * ej;
      states[i].grad = bi * gj;
      states[i + 1].energy = bj * ei;
      states[i + 1].grad = bj * gi;
    }
    ++round;
  };

  for (int s = 0; s < n_samples; ++s) {
    for (int it = 0; it < cfg.inner.iterations_per_sample; ++it) {
      for (std::size_t c = 0; c < C; ++c) move_acc[c]->record(hmc_step(states[c], *tempered[c], hmc[c], rngs[c]));
      if (++since_swap == interval) {
        swap_round();
        since_swap = 0;
      }
    }
    if (!rec.keep(states[0].x)) break;
  }
  return rec.finish();
}

}  // namespace digs
