#include <gtest/gtest.h>

#include <cmath>

#include "digs/metrics.hpp"
#include "digs/rng.hpp"
#include "digs/target_factory.hpp"

namespace digs {
namespace {

PointSet gaussian_1d(int n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  PointSet out;
  for (int i = 0; i < n; ++i) out.push_back(make_point({mean + rng.normal()}));
  return out;
}

MmdConfig single(double h, MmdEstimator e = MmdEstimator::biased) {
  MmdConfig c;
  c.bandwidths = {h};
  c.estimator = e;
  return c;
}

TEST(Mmd, IdenticalSetsBiased) {
  const auto x = gaussian_1d(50, 0.0, 1);
  EXPECT_EQ(mmd(x, x), 0.0);
}

TEST(Mmd, TwoPointHandValue) {
  const PointSet x{make_point({0.0})}, y{make_point({1.0})};
  const auto terms = mmd_squared_terms(x, y, single(1.0));
  ASSERT_EQ(terms.size(), 1u);
  EXPECT_NEAR(terms[0], 0.786939, 1e-6);
  EXPECT_NEAR(mmd(x, y, single(1.0)), std::sqrt(2.0 - 2.0 * std::exp(-0.5)), 1e-15);
}

TEST(Mmd, SmallSetAgainstDirectSums) {
  const PointSet x{make_point({0.0, 1.0}), make_point({2.0, -1.0}), make_point({0.5, 0.5})};
  const PointSet y{make_point({1.0, 1.0}), make_point({-1.0, 0.0})};
  const double h = 0.7;
  auto k = [h](const Point& a, const Point& b) { return std::exp(-(a - b).squaredNorm() / (2 * h * h)); };
  double xx = 0, yy = 0, xy = 0, xx_off = 0, yy_off = 0;
  for (const auto& a : x)
    for (const auto& b : x) {
      xx += k(a, b);
      if (&a != &b) xx_off += k(a, b);
    }
  for (const auto& a : y)
    for (const auto& b : y) {
      yy += k(a, b);
      if (&a != &b) yy_off += k(a, b);
    }
  for (const auto& a : x)
    for (const auto& b : y) xy += k(a, b);
  const double biased = xx / 9 + yy / 4 - 2 * xy / 6;
  const double unbiased = xx_off / 6 + yy_off / 2 - 2 * xy / 6;
  EXPECT_NEAR(mmd_squared_terms(x, y, single(h))[0], biased, 1e-14);
  EXPECT_NEAR(mmd_squared_terms(x, y, single(h, MmdEstimator::unbiased))[0], unbiased, 1e-14);
}

TEST(Mmd, Symmetric) {
  const auto a = gaussian_1d(300, 0.0, 2), b = gaussian_1d(200, 0.7, 3);
  for (auto e : {MmdEstimator::biased, MmdEstimator::unbiased}) {
    MmdConfig c;
    c.estimator = e;
    EXPECT_EQ(mmd(a, b, c), mmd(b, a, c));
  }
}

TEST(Mmd, DimensionMismatch) {
  EXPECT_THROW(mmd({make_point({0.0})}, {make_point({0.0, 1.0})}), ContractViolation);
  EXPECT_THROW(mmd({}, {make_point({0.0})}), ContractViolation);
}

TEST(Mmd, InvalidConfig) {
  MmdConfig c;
  c.bandwidths = {};
  EXPECT_THROW(validate(c), ContractViolation);
  c.bandwidths = {1.0, -0.5};
  EXPECT_THROW(validate(c), ContractViolation);
}

TEST(Mmd, SeparationMonotone) {
  MmdConfig c;
  c.threads = 1;
  c.max_points = 2000;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto base = gaussian_1d(10000, 0.0, 100 + seed);
    std::vector<double> values;
    for (double m : {0.0, 1.0, 2.0, 4.0}) values.push_back(mmd(base, gaussian_1d(10000, m, 200 + seed), c));
    int inversions = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1]) {
        ++inversions;
        EXPECT_LE(values[i - 1] - values[i], 0.005);
      }
    EXPECT_LE(inversions, 1);
  }
}

// The V-statistic carries a positive bias of about sum_h (1/n + 1/m)(1 - E k_h(x, x'));
// the U-statistic is centred on zero.
TEST(Mmd, GroundTruthNoiseFloor) {
  const auto bundle = make_target(presets::mog4_unbalanced());
  const auto a = ground_truth(*bundle.mixture, 1000, 11), b = ground_truth(*bundle.mixture, 1000, 12);
  MmdConfig unbiased;
  unbiased.estimator = MmdEstimator::unbiased;
  std::vector<double> sq;
  const int pairs = 30;
  for (std::uint64_t s = 0; s < pairs; ++s) {
    double total = 0.0;
    for (double t : mmd_squared_terms(ground_truth(*bundle.mixture, 500, 100 + s),
                                      ground_truth(*bundle.mixture, 500, 200 + s), unbiased))
      total += t;
    sq.push_back(total);
  }
  double mean = 0.0, var = 0.0;
  for (double v : sq) mean += v / pairs;
  for (double v : sq) var += (v - mean) * (v - mean) / (pairs - 1);
  EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(var / pairs));

  const MmdConfig biased;
  const auto c = ground_truth(*bundle.mixture, 2000, 13);
  double bias = 0.0;
  for (double h : biased.bandwidths) {
    double k = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) k += std::exp(-(c[i] - c[i + 1000]).squaredNorm() / (2 * h * h));
    bias += (2.0 / 1000.0) * (1.0 - k / 1000.0);
  }
  EXPECT_NEAR(mmd(a, b, biased), std::sqrt(bias), 0.03);
}

TEST(Mmd, CachedReferenceAgrees) {
  const auto bundle = make_target(presets::mog9());
  const auto ref = ground_truth(*bundle.mixture, 800, 1), s = ground_truth(*bundle.mixture, 300, 2);
  for (auto e : {MmdEstimator::biased, MmdEstimator::unbiased}) {
    MmdConfig c;
    c.estimator = e;
    const MmdReference cached(ref, c);
    EXPECT_NEAR(cached.distance(s), mmd(s, ref, c), 1e-10);
  }
}

TEST(Mmd, SubsamplingIsSeeded) {
  MmdConfig c;
  c.max_points = 100;
  const auto a = gaussian_1d(500, 0.0, 1), b = gaussian_1d(500, 0.3, 2);
  EXPECT_EQ(mmd(a, b, c), mmd(a, b, c));
  c.subsample_seed = 9;
  const double other = mmd(a, b, c);
  EXPECT_TRUE(std::isfinite(other));
}

TEST(MmdJson, RoundTrip) {
  MmdConfig c;
  c.estimator = MmdEstimator::unbiased;
  c.bandwidths = {0.5, 3.0};
  const auto back = mmd_config_from_json(mmd_config_to_json(c));
  EXPECT_EQ(back.bandwidths, c.bandwidths);
  EXPECT_EQ(back.estimator, c.estimator);
  EXPECT_THROW(mmd_config_from_json({{"estimator", "jackknife"}}), ConfigError);
}

TEST(Mae, SymmetricTwoPointSet) {
  const MixtureOfGaussians t({1.0}, {make_point({0.0})}, 1.0);
  EXPECT_EQ(mae_quadratic({make_point({-1.0}), make_point({1.0})}, t), 0.0);
}

TEST(Mae, DegenerateMixtureAtMeans) {
  const MixtureOfGaussians t({0.25, 0.75}, {make_point({1.0, 2.0}), make_point({-3.0, 0.0})}, 1e-9);
  PointSet s;
  for (int i = 0; i < 1; ++i) s.push_back(make_point({1.0, 2.0}));
  for (int i = 0; i < 3; ++i) s.push_back(make_point({-3.0, 0.0}));
  EXPECT_LE(mae_quadratic(s, t), 1e-12);
}

TEST(Mae, AnalyticSecondMoment) {
  const MixtureOfGaussians t({0.3, 0.7}, {make_point({1.0, 0.0}), make_point({0.0, 2.0})}, std::vector<double>{0.5, 1.5});
  EXPECT_NEAR(t.second_moment(), 0.3 * (1 + 2 * 0.25) + 0.7 * (4 + 2 * 2.25), 1e-14);
  // A two-point set with exactly the right mean of ||x||^2.
  const double r = std::sqrt(t.second_moment());
  EXPECT_LE(mae_quadratic({make_point({r, 0.0}), make_point({0.0, -r})}, t), 1e-12);
}

TEST(Mae, ZeroTruthIsRejected) {
  const MixtureOfGaussians t({1.0}, {make_point({0.0})}, 1e-200);
  EXPECT_THROW(mae_quadratic({make_point({0.0})}, t), ContractViolation);
}

HistogramSpec two_bins() {
  HistogramSpec s;
  s.bins = {2};
  s.range = {{0.0, 2.0}};
  s.pseudocount = 1e-6;
  return s;
}

TEST(HistogramKl, TwoBinClosedForm) {
  const PointSet p(100, make_point({0.5})), q(100, make_point({1.5}));
  EXPECT_NEAR(histogram_kl(p, q, two_bins()), 18.420680385538756, 1e-9);
}

TEST(HistogramKl, IdenticalSetsGiveZero) {
  const auto p = gaussian_1d(500, 1.0, 4);
  EXPECT_EQ(histogram_kl(p, p, two_bins()), 0.0);
}

TEST(HistogramKl, NonNegative) {
  HistogramSpec s;
  s.bins = {7};
  s.range = {{-3.0, 3.0}};
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_GE(histogram_kl(gaussian_1d(50, 0.0, seed), gaussian_1d(60, 0.5, seed + 100), s), 0.0);
}

// At 64x64 bins most cells hold a handful of points and the plug-in KL sits
// near 0.6; 16x16 keeps the expected count per occupied cell large.
TEST(HistogramKl, SelfConsistencyNoiseFloor) {
  HistogramSpec s;
  s.bins = {16, 16};
  s.range = {{-4.0, 4.0}, {-4.0, 4.0}};
  Rng a(1), b(2);
  PointSet p, q;
  for (int i = 0; i < 10000; ++i) {
    p.push_back(a.normal_vector(2));
    q.push_back(b.normal_vector(2));
  }
  EXPECT_LE(histogram_kl(p, q, s), 0.05);
}

TEST(HistogramKl, OutOfRangePointsUseEdgeBins) {
  const auto h = histogram({make_point({-10.0}), make_point({10.0})}, two_bins());
  EXPECT_NEAR(h[0], 0.5, 1e-6);
  EXPECT_NEAR(h[1], 0.5, 1e-6);
}

TEST(HistogramKl, InvalidSpecs) {
  auto s = two_bins();
  s.bins = {1};
  EXPECT_THROW(histogram({make_point({0.0})}, s), ContractViolation);
  s = two_bins();
  s.pseudocount = 0.0;
  EXPECT_THROW(histogram({make_point({0.0})}, s), ContractViolation);
  EXPECT_THROW(histogram({}, two_bins()), ContractViolation);
}

TEST(ModeCoverage, SamplesAtEveryMode) {
  const PointSet modes{make_point({0.0, 0.0}), make_point({5.0, 0.0}), make_point({0.0, 5.0})};
  const PointSet s{modes[0], modes[0], modes[1], modes[2]};
  const auto c = mode_coverage(s, modes, 0.1);
  EXPECT_EQ(c.count, 3);
  EXPECT_EQ(c.per_mode_mass, (std::vector<double>{0.5, 0.25, 0.25}));
}

TEST(ModeCoverage, NearestMassWithoutCoverage) {
  const PointSet modes{make_point({0.0}), make_point({10.0})};
  const PointSet s{make_point({0.0}), make_point({7.0})};
  const auto c = mode_coverage(s, modes, 1.0);
  EXPECT_EQ(c.count, 1);
  EXPECT_EQ(c.per_mode_mass, (std::vector<double>{0.5, 0.5}));
}

TEST(ModeCoverage, UnbalancedGroundTruthMasses) {
  const auto bundle = make_target(presets::mog4_unbalanced());
  const auto s = ground_truth(*bundle.mixture, 10000, 5);
  const auto c = mode_coverage(s, bundle.mixture->means(), 3 * 0.3);
  EXPECT_EQ(c.count, 4);
  const std::vector<double> w{0.1, 0.1, 0.1, 0.7};
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c.per_mode_mass[j], w[j], 0.03);
}

TEST(ModeCoverage, NonPositiveRadius) {
  EXPECT_THROW(mode_coverage({make_point({0.0})}, {make_point({0.0})}, 0.0), ContractViolation);
}

}  // namespace
}  // namespace digs
