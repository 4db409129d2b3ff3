#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <utility>
#include <vector>

#include "digs/mixture.hpp"

namespace digs {

enum class MmdEstimator { biased, unbiased };

struct MmdConfig {
  std::vector<double> bandwidths{0.25, 0.5, 1.0, 2.0, 4.0};
  MmdEstimator estimator = MmdEstimator::biased;
  /// Sets larger than this are uniformly subsampled (seeded) before the O(n^2) sums.
  std::size_t max_points = 10000;
  std::uint64_t subsample_seed = 0;
  /// Worker threads for the kernel sums; 0 picks hardware concurrency.
  unsigned threads = 0;
};

void validate(const MmdConfig& cfg);
MmdConfig mmd_config_from_json(const nlohmann::json& j);
nlohmann::json mmd_config_to_json(const MmdConfig& cfg);

/// Per-bandwidth MMD^2 estimates, k_h(x, y) = exp(-||x - y||^2 / (2 h^2)).
std::vector<double> mmd_squared_terms(const PointSet& a, const PointSet& b, const MmdConfig& cfg = {});

/// sqrt(max(0, sum_h MMD_h^2)).
double mmd(const PointSet& a, const PointSet& b, const MmdConfig& cfg = {});

/// Reference set with its within-set kernel sums computed once, for scoring
/// many sample sets against the same ground truth. Agrees with mmd() up to
/// summation order.
class MmdReference {
 public:
  MmdReference(const PointSet& points, MmdConfig cfg);
  std::vector<double> squared_terms(const PointSet& samples) const;
  double distance(const PointSet& samples) const;
  const MmdConfig& config() const { return cfg_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

 private:
  MmdConfig cfg_;
  Eigen::MatrixXd points_;
  std::vector<double> self_sums_;
};

/// Relative error (percent) of the sample mean of ||x||^2 against its exact
/// value under `target`.
double mae_quadratic(const PointSet& samples, const MixtureOfGaussians& target);

struct HistogramSpec {
  std::vector<int> bins;                         // per dimension
  std::vector<std::pair<double, double>> range;  // per dimension
  double pseudocount = 1e-6;
};

void validate(const HistogramSpec& spec, int dim);

/// Smoothed, normalized histogram; points outside the range land in the edge bins.
std::vector<double> histogram(const PointSet& samples, const HistogramSpec& spec);

/// KL(P || Q) between the smoothed histograms of the two sample sets.
double histogram_kl(const PointSet& p, const PointSet& q, const HistogramSpec& spec);

struct ModeCoverage {
  int count = 0;                       // modes with a sample within the radius
  std::vector<double> per_mode_mass;   // fraction of samples nearest to each mode
};

ModeCoverage mode_coverage(const PointSet& samples, const PointSet& modes, double radius);

/// Ancestral sampling from a mixture; deterministic in `seed`.
PointSet ground_truth(const MixtureOfGaussians& target, int n, std::uint64_t seed);

}  // namespace digs
