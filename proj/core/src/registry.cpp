#include <cmath>

#include "digs/error.hpp"
#include "digs/harness.hpp"

namespace digs::registry {

using nlohmann::json;

namespace {

json single_level(double alpha, double sigma) {
  return {{"type", "explicit"}, {"levels", {{alpha, sigma}}}};
}

json vp(int T, double alpha_1 = 0.9, double alpha_T = 0.1) {
  return {{"type", "vp_linear"}, {"T", T}, {"alpha_1", alpha_1}, {"alpha_T", alpha_T}};
}

json digs(const std::string& label, const json& schedule, int sweeps, int steps, double step_size,
          const std::string& init = "mh", const std::string& denoiser = "mala") {
  return {{"type", "digs"},
          {"label", label},
          {"schedule", schedule},
          {"sweeps", sweeps},
          {"denoise_steps", steps},
          {"init", init},
          {"denoiser", {{"type", denoiser}, {"step_size", step_size}}}};
}

json mala(double step, int steps, bool tune) {
  return {{"type", "mala"}, {"label", "mala"}, {"step_size", step}, {"steps_per_sample", steps}, {"tune", tune}};
}

// "N leapfrog steps per sample" becomes N / L trajectories of L leapfrog steps each.
json hmc(double step, int leapfrogs_per_sample, bool tune, int L = 10) {
  return {{"type", "hmc"},       {"label", "hmc"}, {"step_size", step}, {"leapfrog_steps", L},
          {"iterations_per_sample", leapfrogs_per_sample / L}, {"tune", tune}};
}

json pt(double step, int leapfrogs_per_sample, bool tune, bool shared_step, int L = 10) {
  json j = {{"type", "pt"},
            {"label", "pt"},
            {"temperatures", {1.0, 5.62, 31.62, 177.83, 1000.0}},
            {"inner", {{"step_size", step}, {"leapfrog_steps", L}, {"iterations_per_sample", leapfrogs_per_sample / L}}},
            {"swap_interval", 1},
            {"tune", tune}};
  if (shared_step) j["step_sizes"] = std::vector<double>(5, step);
  return j;
}

json mog_metrics(double radius_sigma = 3.0) {
  return {{"mmd", {{"estimator", "unbiased"}, {"reference_size", 10000}}},
          {"mae", true},
          {"mode_coverage", {{"radius_sigma", radius_sigma}}}};
}

json base(const std::string& id, const std::string& tier, const std::string& description, const json& target) {
  return {{"id", id}, {"tier", tier}, {"description", description}, {"target", target}, {"x0", "origin"}};
}

json seeds(int n) {
  json s = json::array();
  for (int i = 0; i < n; ++i) s.push_back(i);
  return s;
}

json init_comparison(const std::string& tier) {
  json j = base("init-comparison", tier, "DiGS denoiser initialisation strategies on the unbalanced 4-mode mixture",
                "mog4-unbalanced");
  j["samplers"] = json::array();
  for (const char* init : {"mh", "prev_state", "scaled_noisy"})
    j["samplers"].push_back(digs(std::string("digs-") + init, single_level(1.0, 1.0), 200, 50, 1e-3, init));
  j["n_samples"] = 1000;
  j["seeds"] = seeds(5);
  j["metrics"] = mog_metrics();
  return j;
}

json mog40(const std::string& tier) {
  const bool paper = tier == "paper";
  const int n = paper ? 10000 : 1000;
  json j = base("mog40", tier, "MALA, HMC, PT and DiGS on the 40-mode mixture at matched evaluation budgets", "mog40");
  j["samplers"] = {mala(0.1, 1000, true), hmc(0.1, 1000, true), pt(0.1, 200, true, false),
                   digs("digs", single_level(0.1, std::sqrt(1.0 - 0.01)), 166, 5, 0.1)};
  j["n_samples"] = n;
  j["seeds"] = seeds(5);
  j["budget"] = {{"max_queries", 1000 * n + 5}};
  j["metrics"] = mog_metrics();
  return j;
}

json mixture_of_deltas(const std::string& tier) {
  json j = base("mixture-of-deltas", tier, "DiGS and PT on a 3x3 grid of near-delta modes", "mixture-of-deltas");
  j["samplers"] = {digs("digs", single_level(1.0, 1.0), 1000, 5, 1e-3), pt(1e-2, 1000, false, true, 1000)};
  j["n_samples"] = 1000;
  j["seeds"] = seeds(5);
  j["metrics"] = {{"mode_coverage", {{"radius_sigma", 5.0}}}};
  return j;
}

json mog9_kernel(const std::string& tier) {
  json j = base("mog9-kernel", tier, "Single-level DiGS on the 9-mode grid; sweep alpha or sigma", "mog9");
  auto d = digs("digs", single_level(1.0, 1.0), 1000, 10, 1e-3);
  d["sweep_mode"] = true;
  j["samplers"] = {d};
  j["n_samples"] = 1000;
  j["seeds"] = seeds(5);
  j["metrics"] = mog_metrics();
  return j;
}

json mog9_vp(const std::string& tier) {
  json j = base("mog9-vp", tier, "Multi-level VP-schedule DiGS on the 9-mode grid; sweep T", "mog9");
  j["samplers"] = {digs("digs", vp(3), 300, 10, 1e-3)};
  j["n_samples"] = 1000;
  j["seeds"] = seeds(5);
  j["metrics"] = mog_metrics();
  return j;
}

json rdmc_cost(const std::string& tier) {
  json j = base("rdmc-cost", tier, "Evaluation cost against MMD for RDMC (T=1..4) and DiGS (1..10 sweeps)", "mog9");
  j["samplers"] = json::array();
  for (int T = 1; T <= 4; ++T)
    j["samplers"].push_back({{"type", "rdmc"},
                             {"label", "rdmc-T" + std::to_string(T)},
                             {"T", T},
                             {"gamma", 0.1},
                             {"K", 5},
                             {"L_ula", 5},
                             {"ula_step_size", 1e-2},
                             {"S_is", 100}});
  for (int s = 1; s <= 10; ++s)
    j["samplers"].push_back(
        digs("digs-s" + std::to_string(s), single_level(1.0, 1.0), s, 5, 1e-2, "mh", "ula"));
  j["n_samples"] = 1000;
  j["seeds"] = seeds(5);
  j["metrics"] = {{"mmd", {{"estimator", "unbiased"}, {"reference_size", 10000}}}};
  return j;
}

json bnn(const std::string& tier) {
  const int f = tier == "paper" ? 10 : 1;
  json j = base("bnn", tier, "Toy Bayesian neural network regression: test predictive NLL", "bnn-toy");
  auto d = digs("digs", vp(5), 10 * f, 10, 1e-4);
  d["tune"] = true;
  j["samplers"] = {mala(1e-4, 500 * f, true), hmc(5e-4, 500 * f, true), pt(5e-4, 100 * f, true, true), d};
  j["n_samples"] = 150;
  j["seeds"] = seeds(3);
  j["x0"] = "prior";
  j["metrics"] = {{"predictive_nll", true}};
  return j;
}

json exactness(const std::string& tier) {
  json j = base("exactness", tier, "Moment checks of every sampler on a standard normal",
                {{"preset", "standard_normal"}, {"dim", 5}});
  auto ula = json{{"type", "ula"}, {"label", "ula"}, {"step_size", 1e-3}, {"steps_per_sample", 200}};
  j["samplers"] = {ula, mala(0.5, 5, false), hmc(0.3, 10, false, 5), pt(0.3, 10, false, true, 5)};
  for (const char* init : {"mh", "prev_state", "scaled_noisy"})
    j["samplers"].push_back(digs(std::string("digs-") + init, single_level(1.0, 1.0), 2, 5, 0.3, init));
  j["n_samples"] = 20000;
  j["seeds"] = seeds(1);
  j["metrics"] = {{"moments", true}};
  return j;
}

struct Entry {
  const char* id;
  json (*make)(const std::string&);
};

const Entry kEntries[] = {
    {"init-comparison", init_comparison},
    {"mog40", mog40},
    {"mixture-of-deltas", mixture_of_deltas},
    {"mog9-kernel", mog9_kernel},
    {"mog9-vp", mog9_vp},
    {"rdmc-cost", rdmc_cost},
    {"bnn", bnn},
    {"exactness", exactness},
};

}  // namespace

std::vector<std::string> ids() {
  std::vector<std::string> out;
  for (const auto& e : kEntries) out.emplace_back(e.id);
  return out;
}

json experiment(const std::string& id, const std::string& tier) {
  if (tier != "desk" && tier != "paper") throw ConfigError("unknown tier \"" + tier + "\"");
  for (const auto& e : kEntries)
    if (id == e.id) return e.make(tier);
  throw ConfigError("unknown experiment \"" + id + "\"");
}

std::string description(const std::string& id) { return experiment(id, "desk").at("description").get<std::string>(); }

std::map<std::string, std::vector<double>> sweep_grids(const std::string& id) {
  experiment(id, "desk");
  if (id == "mog9-kernel")
    return {{"alpha", {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 5.0}},
            {"sigma", {0.1, 0.3, 0.5, 1, 2, 3, 4, 5, 6, 7, 8, 10, 15, 20}}};
  if (id == "mog9-vp") return {{"T", {2, 3, 4, 5}}};
  return {};
}

}  // namespace digs::registry
