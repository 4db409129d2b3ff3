#include "digs/target_factory.hpp"

#include <cmath>

#include "digs/error.hpp"
#include "digs/rng.hpp"

namespace digs {

using nlohmann::json;

namespace {

Point point_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a non-empty numeric array");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return p;
}

json point_to_json(const Point& p) {
  json out = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(p(i));
  return out;
}

json grid_mixture(double spacing, double stddev) {
  json means = json::array();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) means.push_back({spacing * i, spacing * j});
  return {{"type", "mog"},
          {"weights", std::vector<double>(9, 1.0 / 9.0)},
          {"means", means},
          {"stddev", stddev}};
}

std::shared_ptr<MixtureOfGaussians> make_mixture(const json& spec) {
  if (!spec.contains("means")) throw ConfigError("mog target: missing \"means\"");
  std::vector<Point> means;
  for (const auto& m : spec.at("means")) means.push_back(point_from_json(m));
  std::vector<double> weights;
  if (spec.contains("weights")) {
    weights = spec.at("weights").get<std::vector<double>>();
  } else {
    weights.assign(means.size(), 1.0 / static_cast<double>(means.size()));
  }
  // Renormalize so decimal literals such as [0.1, 0.1, 0.1, 0.7] pass the
  // sum-to-one check; reject anything that is not already close.
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mog target: weights must sum to 1");
  for (double& w : weights) w /= total;
  std::vector<double> stddevs;
  if (spec.contains("stddevs")) {
    stddevs = spec.at("stddevs").get<std::vector<double>>();
  } else if (spec.contains("stddev")) {
    stddevs.assign(means.size(), spec.at("stddev").get<double>());
  } else {
    throw ConfigError("mog target: missing \"stddev\" or \"stddevs\"");
  }
  return std::make_shared<MixtureOfGaussians>(std::move(weights), std::move(means), std::move(stddevs));
}

}  // namespace

TargetBundle make_target(const json& spec) {
  if (!spec.is_object() || !spec.contains("type")) throw ConfigError("target: missing \"type\"");
  TargetBundle bundle;
  bundle.spec = spec;
  const auto type = spec.at("type").get<std::string>();
  try {
    if (type == "mog") {
      auto mog = make_mixture(spec);
      bundle.mixture = mog;
      bundle.target = mog;
    } else if (type == "bnn") {
      const auto layers = spec.at("layers").get<std::vector<int>>();
      const double noise = spec.value("noise_std", 0.1);
      const auto seed = spec.value("data_seed", std::uint64_t{0});
      BnnProblem problem = make_bnn_problem(layers, spec.value("n_train", 50), spec.value("n_test", 50),
                                            noise, seed);
      auto bnn = std::make_shared<ToyBnnPosterior>(ReluNetwork(layers), problem.train, noise);
      Rng init_rng = Rng(seed).split(3);
      bundle.bnn_init = sample_bnn_prior(bnn->network(), init_rng);
      bundle.test_set = std::move(problem.test);
      bundle.bnn = bnn;
      bundle.target = bnn;
    } else {
      throw ConfigError("target: unknown type \"" + type + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("target: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
  return bundle;
}

json mixture_to_json(const MixtureOfGaussians& mog) {
  json means = json::array();
  for (std::size_t i = 0; i < mog.components(); ++i) means.push_back(point_to_json(mog.mean(i)));
  return {{"type", "mog"}, {"weights", mog.weights()}, {"means", means}, {"stddevs", mog.stddevs()}};
}

namespace presets {

json mog9() { return grid_mixture(3.0, 0.1); }

json mog4_unbalanced() {
  return {{"type", "mog"},
          {"weights", {0.1, 0.1, 0.1, 0.7}},
          {"means", {{-1.25, 1.25}, {1.25, 1.25}, {-1.25, -1.25}, {1.25, -1.25}}},
          {"stddev", 0.3}};
}

json mog40(std::uint64_t seed) {
  Rng rng(seed);
  json means = json::array();
  for (int i = 0; i < 40; ++i) {
    const double a = -40.0 + 80.0 * rng.uniform();
    const double b = -40.0 + 80.0 * rng.uniform();
    means.push_back({a, b});
  }
  return {{"type", "mog"},
          {"weights", std::vector<double>(40, 1.0 / 40.0)},
          {"means", means},
          {"stddev", 1.0},
          {"generator", {{"distribution", "uniform"}, {"low", -40.0}, {"high", 40.0}, {"seed", seed}}}};
}

json mixture_of_deltas() { return grid_mixture(3.0, 0.01); }

json bnn_toy() {
  return {{"type", "bnn"},
          {"layers", {5, 7, 1}},
          {"noise_std", 0.1},
          {"n_train", 50},
          {"n_test", 50},
          {"data_seed", 2024}};
}

json standard_normal(int dim) {
  return {{"type", "mog"},
          {"weights", {1.0}},
          {"means", json::array({std::vector<double>(static_cast<std::size_t>(dim), 0.0)})},
          {"stddev", 1.0}};
}

std::vector<std::string> names() {
  return {"mog9", "mog4-unbalanced", "mog40", "mixture-of-deltas", "bnn-toy"};
}

json by_name(const std::string& name) {
  if (name == "mog9") return mog9();
  if (name == "mog4-unbalanced") return mog4_unbalanced();
  if (name == "mog40") return mog40();
  if (name == "mixture-of-deltas") return mixture_of_deltas();
  if (name == "bnn-toy") return bnn_toy();
  throw ConfigError("unknown preset target \"" + name + "\"");
}

}  // namespace presets

}  // namespace digs
