#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "digs/bnn.hpp"
#include "digs/metrics.hpp"
#include "digs/mixture.hpp"
#include "digs/target_factory.hpp"
#include "test_util.hpp"

namespace digs {
namespace {

using testing::fd_relative_error;

constexpr double kLog2Pi = 1.8378770664093453;

MixtureOfGaussians standard_normal_1d() { return MixtureOfGaussians({1.0}, {make_point({0.0})}, 1.0); }

MixtureOfGaussians two_bumps(double mu, double sg) {
  return MixtureOfGaussians({0.5, 0.5}, {make_point({-mu}), make_point({mu})}, sg);
}

TEST(MixtureEnergy, StandardNormalAtMode) {
  const auto t = standard_normal_1d();
  EXPECT_NEAR(t.energy(make_point({0.0})), 0.5 * kLog2Pi, 1e-12);
  EXPECT_NEAR(0.5 * kLog2Pi, 0.918939, 1e-6);
}

TEST(MixtureEnergy, SymmetricPairHasZeroGradientAtMidpoint) {
  const auto t = two_bumps(1.0, 1.0);
  EXPECT_NEAR(t.gradient(make_point({0.0}))(0), 0.0, 1e-15);
}

TEST(MixtureEnergy, UnbalancedTargetMatchesDirectDensitySum) {
  const auto bundle = make_target(presets::mog4_unbalanced());
  const auto& mog = *bundle.mixture;
  for (const auto& x : {make_point({0.0, 0.0}), make_point({1.0, 1.0}), make_point({-2.0, 0.5})}) {
    double density = 0.0;
    for (std::size_t i = 0; i < mog.components(); ++i) {
      const double s2 = mog.stddevs()[i] * mog.stddevs()[i];
      density += mog.weights()[i] * std::exp(-(x - mog.mean(i)).squaredNorm() / (2 * s2)) / (2 * std::numbers::pi * s2);
    }
    EXPECT_NEAR(bundle.target->energy(x), -std::log(density), 1e-10);
  }
}

TEST(MixtureEnergy, UnbalancedTargetGradientMatchesFiniteDifferences) {
  const auto bundle = make_target(presets::mog4_unbalanced());
  EXPECT_LE(fd_relative_error(*bundle.target, make_point({1.0, 1.0})), 1e-5);
}

TEST(MixtureEnergy, GaussianGradientIsIdentity) {
  const auto t = standard_normal_1d();
  EXPECT_NEAR(t.gradient(make_point({2.0}))(0), 2.0, 1e-14);
}

TEST(MixtureEnergy, DimensionMismatchIsAContractViolation) {
  const auto t = standard_normal_1d();
  EXPECT_THROW(t.energy(make_point({1.0, 2.0})), ContractViolation);
}

TEST(MixtureEnergy, FiniteFarFromEveryMode) {
  const auto bundle = make_target(presets::mixture_of_deltas());
  const double e = bundle.target->energy(make_point({1e3, -1e3}));
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_TRUE(bundle.target->gradient(make_point({1e3, -1e3})).allFinite());
}

TEST(MixtureEnergy, RejectsMalformedMixtures) {
  EXPECT_THROW(make_target({{"type", "mog"}, {"weights", {0.5, 0.6}}, {"means", {{0.0}, {1.0}}}, {"stddev", 1.0}}),
               ConfigError);
  EXPECT_THROW(make_target({{"type", "mog"}, {"weights", {1.0}}, {"means", {{0.0}}}}), ConfigError);
  EXPECT_THROW(make_target({{"type", "nope"}}), ConfigError);
}

TEST(MixtureConvolve, IdentityKernelLimit) {
  const auto bundle = make_target(presets::mog4_unbalanced());
  const auto out = mog_convolve(*bundle.mixture, {1.0, 1e-12});
  for (std::size_t i = 0; i < out.components(); ++i) {
    EXPECT_NEAR((out.mean(i) - bundle.mixture->mean(i)).norm(), 0.0, 1e-9);
    EXPECT_NEAR(out.stddevs()[i], bundle.mixture->stddevs()[i], 1e-9);
    EXPECT_NEAR(out.weights()[i], bundle.mixture->weights()[i], 1e-15);
  }
}

TEST(MixtureConvolve, SingleGaussianClosure) {
  const MixtureOfGaussians t({1.0}, {make_point({2.0})}, 1.0);
  const auto out = mog_convolve(t, {0.5, 1.0});
  EXPECT_NEAR(out.mean(0)(0), 1.0, 1e-15);
  EXPECT_NEAR(out.stddevs()[0] * out.stddevs()[0], 1.25, 1e-14);
}

TEST(MixtureConvolve, TwoBumpsAtOriginMatchClosedForm) {
  for (double sg : {1.0, 0.1, 1e-4}) {
    for (double sigma : {0.5, 1.0}) {
      const double mu = 1.0;
      const auto out = mog_convolve(two_bumps(mu, sg), {1.0, sigma});
      const double v = sg * sg + sigma * sigma;
      const double expected = -mu * mu / (2 * v) - 0.5 * std::log(2 * std::numbers::pi * v);
      EXPECT_NEAR(out.log_density(make_point({0.0})), expected, 1e-12);
    }
  }
}

/// log of the convolution integral of a 1D mixture, computed on a trapezoid grid.
double quadrature_log_convolved(const MixtureOfGaussians& t, const ConvolutionKernel& k, double x_tilde) {
  auto integrand = [&](double x) {
    const double r = x_tilde - k.alpha * x;
    return std::exp(t.log_density(make_point({x})) - r * r / (2 * k.sigma * k.sigma)) /
           std::sqrt(2 * std::numbers::pi * k.sigma * k.sigma);
  };
  return std::log(testing::trapezoid(integrand, -20.0, 20.0, 20001));
}

TEST(MixtureConvolve, MatchesQuadratureInOneDimension) {
  const MixtureOfGaussians t({0.2, 0.5, 0.3}, {make_point({-3.0}), make_point({0.5}), make_point({4.0})},
                             std::vector<double>{0.7, 1.0, 0.4});
  for (const ConvolutionKernel k : {ConvolutionKernel{1.0, 1.0}, ConvolutionKernel{0.5, 0.8}, ConvolutionKernel{0.9, 0.3}}) {
    const auto conv = mog_convolve(t, k);
    for (double xt : {-4.0, -1.0, 0.0, 0.7, 3.0}) {
      EXPECT_NEAR(conv.log_density(make_point({xt})), quadrature_log_convolved(t, k, xt), 1e-6)
          << "alpha=" << k.alpha << " sigma=" << k.sigma << " x~=" << xt;
    }
  }
}

TEST(Tempering, IdentityTemperature) {
  const auto bundle = make_target(presets::mog9());
  const Point x = make_point({0.3, -1.2});
  EXPECT_EQ(tempered_log_density(*bundle.target, 1.0, x), -bundle.target->energy(x));
}

TEST(Tempering, StandardGaussianBetaTwo) {
  const auto t = standard_normal_1d();
  const double with_const = tempered_log_density(t, 2.0, make_point({1.0}));
  const double constant = tempered_log_density(t, 2.0, make_point({0.0}));
  EXPECT_NEAR(with_const - constant, -1.0, 1e-14);
}

TEST(Tempering, NonPositiveBetaIsRejected) {
  const auto t = standard_normal_1d();
  EXPECT_THROW(tempered_log_density(t, 0.0, make_point({0.0})), ContractViolation);
  EXPECT_THROW(TemperedTarget(t, -1.0), ContractViolation);
}

TEST(Tempering, TwoBumpDivergenceAgainstConvolutionLowerBound) {
  const double mu = 1.0, sg = 1e-4, beta = 0.1;
  const auto t = two_bumps(mu, sg);
  const double tempered = tempered_log_density(t, beta, make_point({0.0}));
  EXPECT_LT(tempered, -1e6);
  const double sigma = 1.0, v = sg * sg + sigma * sigma;
  const double bound = -mu * mu / (2 * v) - 0.5 * std::log(2 * std::numbers::pi * v);
  EXPECT_GE(mog_convolve(t, {1.0, sigma}).log_density(make_point({0.0})), bound - 1e-12);
}

TEST(Tempering, SupportPreservedFarFromModes) {
  const auto t = two_bumps(1.0, 0.01);
  const Point far = make_point({1.0 + 40 * 0.01 * 1e3});
  EXPECT_EQ(std::exp(t.log_density(far)), 0.0);
  for (double beta : {0.001, 0.1, 0.5}) EXPECT_EQ(std::exp(tempered_log_density(t, beta, far)), 0.0);
}

TEST(TemperedTarget, ScalesEnergyAndGradientAndCountsAgainstBase) {
  const auto bundle = make_target(presets::mog9());
  const TemperedTarget hot(*bundle.target, 0.25);
  const Point x = make_point({0.4, 2.0});
  bundle.target->reset_counts();
  Point g;
  const double e = hot.energy_and_gradient(x, g);
  EXPECT_NEAR(e, 0.25 * bundle.target->energy(x), 1e-12);
  EXPECT_NEAR((g - 0.25 * bundle.target->gradient(x)).norm(), 0.0, 1e-12);
  EXPECT_EQ(bundle.target->counts().queries, 3u);
}

TEST(Counters, EachCallIncrementsExactlyOnce) {
  const auto bundle = make_target(presets::mog40());
  const auto& t = *bundle.target;
  t.reset_counts();
  const Point x = make_point({1.0, 2.0});
  t.energy(x);
  EXPECT_EQ(t.counts(), (EvalCounts{1, 0, 1}));
  t.gradient(x);
  EXPECT_EQ(t.counts(), (EvalCounts{1, 1, 2}));
  Point g;
  t.energy_and_gradient(x, g);
  EXPECT_EQ(t.counts(), (EvalCounts{2, 2, 3}));
}

// Every shipped target, 100 seeded points each.
TEST(FiniteDifferences, AllRegisteredTargets) {
  for (const auto& name : presets::names()) {
    const auto bundle = make_target(presets::by_name(name));
    const auto& t = *bundle.target;
    Rng rng(7);
    int checked = 0;
    for (int trial = 0; checked < 100 && trial < 10000; ++trial) {
      Point x;
      if (bundle.mixture) {
        const auto& m = *bundle.mixture;
        const std::size_t i = rng.below(m.components());
        x = m.mean(i) + 3.0 * m.stddevs()[i] * rng.normal_vector(t.dim());
      } else {
        x = sample_bnn_prior(bundle.bnn->network(), rng);
        if (bundle.bnn->network().min_abs_preactivation(x, bundle.bnn->train().inputs) < 1e-3) continue;
      }
      EXPECT_LE(fd_relative_error(t, x), 1e-5) << name << " at trial " << trial;
      ++checked;
    }
    EXPECT_EQ(checked, 100) << name;
  }
}

TEST(Bnn, SmallRandomInstanceGradient) {
  const auto problem = make_bnn_problem({2, 3, 1}, 4, 0, 0.1, 11);
  const ToyBnnPosterior post(ReluNetwork(problem.layer_sizes), problem.train, 0.1);
  Rng rng(3);
  int checked = 0;
  while (checked < 20) {
    const Point theta = sample_bnn_prior(post.network(), rng);
    if (post.network().min_abs_preactivation(theta, problem.train.inputs) < 1e-3) continue;
    EXPECT_LE(fd_relative_error(post, theta), 1e-5);
    ++checked;
  }
}

TEST(Bnn, EmptyDataGivesPriorEnergy) {
  const ReluNetwork net({3, 4, 2});
  Dataset empty;
  empty.inputs.resize(3, 0);
  empty.outputs.resize(2, 0);
  const ToyBnnPosterior post(net, empty, 0.1);
  Rng rng(5);
  const Point theta = sample_bnn_prior(net, rng);
  const Point& sp = post.prior_std();
  EXPECT_NEAR((post.gradient(theta) - theta.cwiseQuotient(sp.cwiseAbs2())).norm(), 0.0, 1e-12);
  const Point theta2 = 0.5 * theta;
  const double de = post.energy(theta) - post.energy(theta2);
  const double expected = 0.5 * (theta.cwiseQuotient(sp).squaredNorm() - theta2.cwiseQuotient(sp).squaredNorm());
  EXPECT_NEAR(de, expected, 1e-10);
}

TEST(Bnn, ZeroWeightsPredictZero) {
  const auto problem = make_bnn_problem({3, 5, 1}, 6, 0, 0.1, 4);
  const ToyBnnPosterior post(ReluNetwork(problem.layer_sizes), problem.train, 0.1);
  const Point zero = Point::Zero(post.dim());
  EXPECT_NEAR(post.network().forward(zero, problem.train.inputs).cwiseAbs().maxCoeff(), 0.0, 0.0);
  // The data term of the energy is sum y^2 / (2 sigma_n^2); the prior term vanishes at 0.
  const ToyBnnPosterior half(ReluNetwork(problem.layer_sizes), problem.train, 0.2);
  const double ys = problem.train.outputs.squaredNorm();
  EXPECT_NEAR(post.energy(zero) - half.energy(zero), ys / (2 * 0.01) - ys / (2 * 0.04) + 6 * std::log(0.1 / 0.2),
              1e-9);
}

TEST(Bnn, ToyPresetHasFiftyParameters) {
  const auto bundle = make_target(presets::bnn_toy());
  EXPECT_EQ(bundle.target->dim(), 5 * 7 + 7 + 7 * 1 + 1);
  ASSERT_TRUE(bundle.test_set.has_value());
  EXPECT_EQ(bundle.bnn->train().size(), 50);
}

TEST(Presets, Mog40IsSeededAndInsideTheBox) {
  const auto a = make_target(presets::mog40()), b = make_target(presets::mog40());
  ASSERT_EQ(a.mixture->components(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(a.mixture->mean(i), b.mixture->mean(i));
    EXPECT_LE(a.mixture->mean(i).cwiseAbs().maxCoeff(), 40.0);
  }
  EXPECT_NE(make_target(presets::mog40(41)).mixture->mean(0), a.mixture->mean(0));
}

TEST(Presets, UnbalancedWeights) {
  const auto b = make_target(presets::mog4_unbalanced());
  EXPECT_EQ(b.mixture->weights(), (std::vector<double>{0.1, 0.1, 0.1, 0.7}));
}

TEST(Presets, RoundTripThroughJson) {
  for (const auto& name : presets::names()) {
    const auto bundle = make_target(presets::by_name(name));
    if (!bundle.mixture) continue;
    const auto again = make_target(mixture_to_json(*bundle.mixture));
    const Point x = make_point({0.3, -0.7});
    EXPECT_EQ(again.target->energy(x), bundle.target->energy(x)) << name;
  }
  EXPECT_THROW(presets::by_name("mog41"), ConfigError);
}

TEST(GroundTruth, SingleComponentMean) {
  const MixtureOfGaussians t({1.0}, {make_point({1.5, -2.0})}, 0.5);
  const auto draws = ground_truth(t, 20000, 3);
  Point mean = Point::Zero(2);
  for (const auto& x : draws) mean += x;
  mean /= static_cast<double>(draws.size());
  const double se = 0.5 / std::sqrt(20000.0);
  EXPECT_LE((mean - t.mean(0)).cwiseAbs().maxCoeff(), 4 * se);
}

TEST(GroundTruth, DegenerateWeights) {
  const MixtureOfGaussians t({1.0 - 2e-300, 1e-300, 1e-300}, {make_point({0.0}), make_point({50.0}), make_point({-50.0})},
                             1.0);
  for (const auto& x : ground_truth(t, 1000, 1)) EXPECT_LT(std::abs(x(0)), 10.0);
}

TEST(GroundTruth, UnbalancedFrequencies) {
  const auto b = make_target(presets::mog4_unbalanced());
  const auto draws = ground_truth(*b.mixture, 100000, 9);
  const auto cov = mode_coverage(draws, b.mixture->means(), 3 * 0.3);
  const std::vector<double> w{0.1, 0.1, 0.1, 0.7};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(cov.per_mode_mass[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(i)], 0.01);
}

TEST(GroundTruth, DeterministicPerSeed) {
  const auto b = make_target(presets::mog9());
  EXPECT_EQ(ground_truth(*b.mixture, 100, 5), ground_truth(*b.mixture, 100, 5));
  EXPECT_NE(ground_truth(*b.mixture, 100, 5), ground_truth(*b.mixture, 100, 6));
}

}  // namespace
}  // namespace digs
