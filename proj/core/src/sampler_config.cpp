#include "digs/sampler_config.hpp"

#include <cmath>

#include "digs/error.hpp"

namespace digs {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

HmcConfig hmc_from_json(const json& j) {
  HmcConfig c;
  c.step_size = get_or(j, "step_size", c.step_size);
  c.leapfrog_steps = get_or(j, "leapfrog_steps", c.leapfrog_steps);
  c.mass = get_or(j, "mass", c.mass);
  c.iterations_per_sample = get_or(j, "iterations_per_sample", c.iterations_per_sample);
  return c;
}

json hmc_to_json(const HmcConfig& c) {
  return {{"step_size", c.step_size},
          {"leapfrog_steps", c.leapfrog_steps},
          {"mass", c.mass},
          {"iterations_per_sample", c.iterations_per_sample}};
}

SamplerConfig config_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "ula" || type == "mala") {
    LangevinConfig c;
    c.step_size = get_or(j, "step_size", c.step_size);
    c.steps_per_sample = get_or(j, "steps_per_sample", c.steps_per_sample);
    require(c.step_size > 0.0 && c.steps_per_sample >= 1, type + ": invalid step configuration");
    if (type == "ula") return UlaConfig{c};
    return MalaConfig{c};
  }
  if (type == "hmc") {
    HmcConfig c = hmc_from_json(j);
    validate(c);
    return c;
  }
  if (type == "pt") {
    PtConfig c;
    c.temperatures = get_or(j, "temperatures", c.temperatures);
    c.inner = hmc_from_json(j.value("inner", json::object()));
    c.step_sizes = get_or(j, "step_sizes", c.step_sizes);
    c.swap_interval = get_or(j, "swap_interval", c.swap_interval);
    validate(c);
    return c;
  }
  if (type == "digs") {
    DigsConfig c;
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    c.sweeps = get_or(j, "sweeps", c.sweeps);
    c.denoise_steps = get_or(j, "denoise_steps", c.denoise_steps);
    c.init = init_strategy_from_string(get_or<std::string>(j, "init", "mh"));
    c.sweep_mode = get_or(j, "sweep_mode", c.sweep_mode);
    const json d = j.value("denoiser", json::object());
    c.denoiser.kind = denoiser_from_string(get_or<std::string>(d, "type", "mala"));
    c.denoiser.step_size = get_or(d, "step_size", c.denoiser.step_size);
    c.denoiser.leapfrog_steps = get_or(d, "leapfrog_steps", c.denoiser.leapfrog_steps);
    c.denoiser.mass = get_or(d, "mass", c.denoiser.mass);
    validate(c);
    return c;
  }
  if (type == "rdmc") {
    RdmcConfig c;
    c.steps = get_or(j, "T", c.steps);
    c.total_time = get_or(j, "gamma", c.total_time);
    c.posterior_samples = get_or(j, "K", c.posterior_samples);
    c.ula_steps = get_or(j, "L_ula", c.ula_steps);
    c.ula_step_size = get_or(j, "ula_step_size", c.ula_step_size);
    c.is_samples = get_or(j, "S_is", c.is_samples);
    validate(c);
    return c;
  }
  throw ConfigError("unknown sampler type '" + type + "'");
}

}  // namespace

std::string sampler_type(const SamplerConfig& cfg) {
  static const char* names[] = {"ula", "mala", "hmc", "pt", "digs", "rdmc"};
  return names[cfg.index()];
}

SamplerSpec sampler_from_json(const json& j) {
  try {
    SamplerSpec s;
    s.config = config_from_json(j);
    s.label = j.value("label", sampler_type(s.config));
    s.tune = j.value("tune", false);
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("sampler config: ") + e.what());
  }
}

json sampler_to_json(const SamplerSpec& spec) {
  json j = std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UlaConfig> || std::is_same_v<T, MalaConfig>) {
          return {{"step_size", c.step_size}, {"steps_per_sample", c.steps_per_sample}};
        } else if constexpr (std::is_same_v<T, HmcConfig>) {
          return hmc_to_json(c);
        } else if constexpr (std::is_same_v<T, PtConfig>) {
          json p = {{"temperatures", c.temperatures}, {"inner", hmc_to_json(c.inner)}, {"swap_interval", c.swap_interval}};
          if (!c.step_sizes.empty()) p["step_sizes"] = c.step_sizes;
          return p;
        } else if constexpr (std::is_same_v<T, DigsConfig>) {
          return {{"schedule", schedule_to_json(c.schedule)},
                  {"sweeps", c.sweeps},
                  {"denoise_steps", c.denoise_steps},
                  {"init", to_string(c.init)},
                  {"sweep_mode", c.sweep_mode},
                  {"denoiser",
                   {{"type", to_string(c.denoiser.kind)},
                    {"step_size", c.denoiser.step_size},
                    {"leapfrog_steps", c.denoiser.leapfrog_steps},
                    {"mass", c.denoiser.mass}}}};
        } else {
          return {{"T", c.steps},
                  {"gamma", c.total_time},
                  {"K", c.posterior_samples},
                  {"L_ula", c.ula_steps},
                  {"ula_step_size", c.ula_step_size},
                  {"S_is", c.is_samples}};
        }
      },
      spec.config);
  j["type"] = sampler_type(spec.config);
  j["label"] = spec.label;
  j["tune"] = spec.tune;
  return j;
}

std::uint64_t expected_queries(const SamplerSpec& spec, int n_samples) {
  const auto n = static_cast<std::uint64_t>(n_samples);
  return std::visit(
      [n](const auto& c) -> std::uint64_t {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UlaConfig> || std::is_same_v<T, MalaConfig>) {
          return 1 + n * c.steps_per_sample;
        } else if constexpr (std::is_same_v<T, HmcConfig>) {
          return 1 + n * c.iterations_per_sample * c.leapfrog_steps;
        } else if constexpr (std::is_same_v<T, PtConfig>) {
          return c.temperatures.size() * (1 + n * c.inner.iterations_per_sample * c.inner.leapfrog_steps);
        } else if constexpr (std::is_same_v<T, DigsConfig>) {
          return 1 + n * c.schedule.size() * c.sweeps * digs_sweep_cost(c);
        } else {
          return n * rdmc_cost_per_sample(c);
        }
      },
      spec.config);
}

SamplerRun run_sampler(const EnergyTarget& target, const SamplerSpec& spec, int n_samples, const Point& x0,
                       const Rng& rng, RunBudget budget) {
  require(n_samples >= 1, "run_sampler: need at least one sample");
  require_dim(x0, target.dim(), "run_sampler");
  SamplerConfig cfg = spec.config;
  Rng tune_rng = rng.split(1);
  EvalCounts tuning;
  std::map<std::string, double> tuned;

  if (spec.tune) {
    if (auto* c = std::get_if<MalaConfig>(&cfg)) {
      const TuneResult r = tune_mala(target, x0, c->step_size, tune_rng);
      c->step_size = r.step_size;
      tuning += r.counts;
      tuned["step_size"] = r.step_size;
      tuned["pilot_acceptance"] = r.acceptance;
    } else if (auto* c = std::get_if<HmcConfig>(&cfg)) {
      const TuneResult r = tune_hmc(target, x0, *c, tune_rng);
      c->step_size = r.step_size;
      tuning += r.counts;
      tuned["step_size"] = r.step_size;
      tuned["pilot_acceptance"] = r.acceptance;
    } else if (auto* c = std::get_if<PtConfig>(&cfg)) {
      std::vector<double> steps;
      for (std::size_t i = 0; i < c->temperatures.size(); ++i) {
        const TemperedTarget t(target, 1.0 / c->temperatures[i]);
        HmcConfig h = c->inner;
        h.step_size = chain_step_size(*c, i);
        Rng chain_rng = tune_rng.split(i);
        const TuneResult r = tune_hmc(t, x0, h, chain_rng);
        steps.push_back(r.step_size);
        tuning += r.counts;
        tuned["step_size_chain" + std::to_string(i)] = r.step_size;
        tuned["pilot_acceptance_chain" + std::to_string(i)] = r.acceptance;
      }
      c->step_sizes = steps;
    } else if (auto* c = std::get_if<DigsConfig>(&cfg); c && c->denoiser.kind == DenoiserKind::mala) {
      // Denoiser steps share the plain MALA tuning on the target itself.
      const TuneResult r = tune_mala(target, x0, c->denoiser.step_size, tune_rng);
      c->denoiser.step_size = r.step_size;
      tuning += r.counts;
      tuned["step_size"] = r.step_size;
      tuned["pilot_acceptance"] = r.acceptance;
    }
  }

  Rng run_rng = rng.split(0);
  SamplerRun run = std::visit(
      [&](const auto& c) -> SamplerRun {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, UlaConfig>) return run_ula(target, c, n_samples, x0, run_rng, budget);
        else if constexpr (std::is_same_v<T, MalaConfig>) return run_mala(target, c, n_samples, x0, run_rng, budget);
        else if constexpr (std::is_same_v<T, HmcConfig>) return run_hmc(target, c, n_samples, x0, run_rng, budget);
        else if constexpr (std::is_same_v<T, PtConfig>) return pt_run(target, c, n_samples, x0, run_rng, budget);
        else if constexpr (std::is_same_v<T, DigsConfig>) return digs_run(target, c, n_samples, x0, run_rng, budget);
        else return rdmc_run(target, c, n_samples, run_rng, budget);
      },
      cfg);
  run.sampler = spec.label;
  run.tuning_counts = tuning;
  run.tuned = std::move(tuned);
  return run;
}

}  // namespace digs
