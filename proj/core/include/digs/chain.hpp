#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "digs/energy_target.hpp"
#include "digs/rng.hpp"

namespace digs {

/// Position with cached energy and gradient at that position. ULA without
/// energy tracking leaves `energy` as NaN.
struct ChainState {
  Point x;
  double energy = std::numeric_limits<double>::quiet_NaN();
  Point grad;

  bool has_energy() const { return energy == energy; }
};

/// Evaluates energy and gradient at x (one query).
ChainState make_state(const EnergyTarget& target, Point x);

struct AcceptanceCounter {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
  AcceptanceCounter& operator+=(const AcceptanceCounter& o) {
    proposed += o.proposed;
    accepted += o.accepted;
    return *this;
  }
};

/// Stop condition on target queries. Checked after each kept sample; a
/// sample that crosses the limit is discarded and the run is truncated.
struct RunBudget {
  std::optional<std::uint64_t> max_queries;
};

/// Outcome of one sampler on one target.
struct SamplerRun {
  std::string sampler;
  PointSet samples;
  std::map<std::string, AcceptanceCounter> acceptance;
  EvalCounts counts;         // benchmark cost, tuning excluded
  EvalCounts tuning_counts;  // pilot runs of the step-size tuner
  std::map<std::string, double> tuned;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  bool truncated = false;
};

/// Tracks counts and truncation while a run produces samples.
class RunRecorder {
 public:
  RunRecorder(const EnergyTarget& target, std::string sampler, RunBudget budget);

  /// Returns false when the budget is exceeded; the sample is then dropped.
  bool keep(const Point& x);
  SamplerRun finish();
  SamplerRun& run() { return run_; }

 private:
  const EnergyTarget& target_;
  RunBudget budget_;
  EvalCounts start_;
  std::chrono::steady_clock::time_point t0_;
  SamplerRun run_;
};

// ---------------------------------------------------------------- ULA

/// x' = x - eta grad E(x) + sqrt(2 eta) eps. One gradient query (joint
/// energy+gradient when `track_energy`).
void ula_step(ChainState& state, const EnergyTarget& target, double eta, Rng& rng,
              bool track_energy = false);
void ula_step_with_noise(ChainState& state, const EnergyTarget& target, double eta, const Point& eps,
                         bool track_energy = false);

// ---------------------------------------------------------------- MALA

/// log q(to | from) for q(x'|x) = N(x' | x - eta grad E(x), 2 eta I), without
/// the shared normalizing constant.
double mala_log_proposal(const Point& to, const Point& from, const Point& grad_from, double eta);

/// log of the MALA acceptance ratio for moving from `current` to `proposal`.
double mala_log_acceptance(const ChainState& current, const ChainState& proposal, double eta);

/// One MALA transition; exactly one joint query at the proposal.
bool mala_step(ChainState& state, const EnergyTarget& target, double eta, Rng& rng);
/// MALA with the proposal noise and the uniform draw supplied.
bool mala_step_with(ChainState& state, const EnergyTarget& target, double eta, const Point& eps,
                    double uniform);

// ---------------------------------------------------------------- HMC

struct HmcConfig {
  double step_size = 0.1;
  int leapfrog_steps = 10;
  double mass = 1.0;
  int iterations_per_sample = 1;
};

void validate(const HmcConfig& cfg);

/// Kick-drift-kick integration with mass matrix m I. Evaluates the gradient
/// at the start point and after every drift (1 + L queries).
std::pair<Point, Point> leapfrog(const Point& x, const Point& v, const EnergyTarget& target, double eps,
                                 int steps, double mass);

/// Leapfrog reusing the cached gradient in `state`; L queries.
void leapfrog_cached(ChainState& state, Point& v, const EnergyTarget& target, double eps, int steps,
                     double mass);

/// One HMC transition with fresh momentum v ~ N(0, m I).
bool hmc_step(ChainState& state, const EnergyTarget& target, const HmcConfig& cfg, Rng& rng);
bool hmc_step_with(ChainState& state, const EnergyTarget& target, const HmcConfig& cfg,
                   const Point& momentum, double uniform);

// ---------------------------------------------------------------- plain runs

struct LangevinConfig {
  double step_size = 1e-2;
  int steps_per_sample = 1;
};
struct UlaConfig : LangevinConfig {};
struct MalaConfig : LangevinConfig {};

/// Query cost: 1 + n * steps_per_sample.
SamplerRun run_ula(const EnergyTarget& target, const UlaConfig& cfg, int n_samples, const Point& x0,
                   Rng& rng, RunBudget budget = {});
/// Query cost: 1 + n * steps_per_sample.
SamplerRun run_mala(const EnergyTarget& target, const MalaConfig& cfg, int n_samples,
                    const Point& x0, Rng& rng, RunBudget budget = {});
/// Query cost: 1 + n * iterations_per_sample * leapfrog_steps.
SamplerRun run_hmc(const EnergyTarget& target, const HmcConfig& cfg, int n_samples, const Point& x0,
                   Rng& rng, RunBudget budget = {});

}  // namespace digs
