#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <variant>

#include "digs/digs_sampler.hpp"
#include "digs/parallel_tempering.hpp"
#include "digs/rdmc.hpp"
#include "digs/tuning.hpp"

namespace digs {

using SamplerConfig = std::variant<UlaConfig, MalaConfig, HmcConfig, PtConfig, DigsConfig, RdmcConfig>;

struct SamplerSpec {
  std::string label;
  SamplerConfig config;
  /// Auto-tune the MALA / HMC / PT step sizes (and the DiGS MALA denoiser) before the run.
  bool tune = false;
};

std::string sampler_type(const SamplerConfig& cfg);

/// {"type": "ula"|"mala"|"hmc"|"pt"|"digs"|"rdmc", "label": ..., ...}.
/// Throws ConfigError on unknown types, missing fields or invalid values.
SamplerSpec sampler_from_json(const nlohmann::json& j);
nlohmann::json sampler_to_json(const SamplerSpec& spec);

/// Closed-form query count of run_sampler without tuning.
std::uint64_t expected_queries(const SamplerSpec& spec, int n_samples);

/// Tunes (if requested, with rng.split(1)) and runs (with rng.split(0)).
SamplerRun run_sampler(const EnergyTarget& target, const SamplerSpec& spec, int n_samples, const Point& x0,
                       const Rng& rng, RunBudget budget = {});

}  // namespace digs
