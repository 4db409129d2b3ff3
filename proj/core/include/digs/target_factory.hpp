#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "digs/bnn.hpp"
#include "digs/mixture.hpp"

namespace digs {

/// A constructed target plus whatever side information the harness needs
/// (the mixture for ground-truth draws, the BNN test split, ...).
struct TargetBundle {
  std::shared_ptr<const EnergyTarget> target;
  std::shared_ptr<const MixtureOfGaussians> mixture;  // set for "mog"
  std::shared_ptr<const ToyBnnPosterior> bnn;         // set for "bnn"
  std::optional<Dataset> test_set;
  std::optional<Point> bnn_init;  // prior draw shared by every sampler
  nlohmann::json spec;
};

/// Build a target from { "type": "mog" | "bnn", ... }. Throws ConfigError.
TargetBundle make_target(const nlohmann::json& spec);

nlohmann::json mixture_to_json(const MixtureOfGaussians& mog);

namespace presets {

inline constexpr std::uint64_t kMog40Seed = 40;

/// Nine equal-weight components on a 3x3 grid, sigma_g = 0.1.
nlohmann::json mog9();
/// Four components with weights [0.1, 0.1, 0.1, 0.7].
nlohmann::json mog4_unbalanced();
/// 40 equal-weight components, means uniform on [-40, 40]^2, sigma_g = 1.
nlohmann::json mog40(std::uint64_t seed = kMog40Seed);
/// 3x3 grid with sigma_g = 0.01.
nlohmann::json mixture_of_deltas();
/// ReLU regression posterior with 50 parameters and 50 training points.
nlohmann::json bnn_toy();
/// Standard normal N(0, I_d) expressed as a one-component mixture.
nlohmann::json standard_normal(int dim);

/// Names of the shipped canonical targets.
std::vector<std::string> names();
nlohmann::json by_name(const std::string& name);

}  // namespace presets

}  // namespace digs
