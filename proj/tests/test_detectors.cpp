#include <gtest/gtest.h>

#include <cmath>

#include "lsncp/detectors.hpp"
#include "oracles.hpp"

using namespace lsncp;

namespace {

void expect_process_near(const GlobalProcess& d, const std::vector<double>& ref, double tol) {
  ASSERT_EQ(d.values().size(), ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(d(k), ref[k], tol) << "k=" << k;
}

}  // namespace

TEST(Cusum, HandExample) {
  const auto d = cusum_process(Series({1, 2, 3, 4}));
  expect_process_near(d, {0, -0.75, -1.0, -0.75, 0}, 1e-15);
}

TEST(Cusum, ConstantIsZero) {
  const auto d = cusum_process(Series(std::vector<double>(37, 3.3)));
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Cusum, MatchesOracleAndEndsAtZero) {
  const auto x = oracle::normal_series(300, 1);
  const auto d = cusum_process(Series(x));
  expect_process_near(d, oracle::cusum(x), 1e-12);
  EXPECT_NEAR(d(300), 0.0, 1e-10);
  EXPECT_EQ(d(0), 0.0);
}

TEST(Cusum, AffineEquivariance) {
  const auto x = oracle::normal_series(120, 2);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -2.5 * x[i] + 7.0;
  const auto dx = cusum_process(Series(x));
  const auto dy = cusum_process(Series(y));
  for (std::size_t k = 0; k <= 120; ++k) EXPECT_NEAR(dy(k), -2.5 * dx(k), 1e-12);
}

TEST(Cusum, TooShort) { EXPECT_THROW(cusum_process(Series({1.0})), InvalidArgument); }

TEST(Wilcoxon, HandExample) {
  const auto d = wilcoxon_process(Series({1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(d(2), -0.25);
  EXPECT_EQ(d(0), 0.0);
  EXPECT_EQ(d(4), 0.0);
}

TEST(Wilcoxon, MidranksForTies) {
  const auto d = wilcoxon_process(Series({1, 1, 2, 2}));
  EXPECT_DOUBLE_EQ(d(2), -0.25);
  expect_process_near(d, oracle::wilcoxon({1, 1, 2, 2}), 1e-15);
}

TEST(Wilcoxon, MatchesRankOracleWithTies) {
  auto x = oracle::normal_series(150, 3);
  for (auto& v : x) v = std::round(v * 3.0);
  expect_process_near(wilcoxon_process(Series(x)), oracle::wilcoxon(x), 1e-12);
}

TEST(Wilcoxon, PairwiseCountCrossCheck) {
  const auto x = oracle::normal_series(60, 4);
  const auto d = wilcoxon_process(Series(x));
  for (std::size_t k = 1; k < 60; ++k) EXPECT_NEAR(std::abs(d(k)), std::abs(oracle::wilcoxon_pairwise(x, k)), 1e-12);
}

TEST(Wilcoxon, MonotoneInvariance) {
  const auto x = oracle::normal_series(200, 5);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::exp(x[i]);
  const auto a = wilcoxon_process(Series(x));
  const auto b = wilcoxon_process(Series(y));
  for (std::size_t k = 0; k <= 200; ++k) EXPECT_EQ(a(k), b(k));
}

TEST(Wilcoxon, IncreasingSeriesMinimumNearMiddle) {
  std::vector<double> x(100);
  for (std::size_t i = 0; i < 100; ++i) x[i] = static_cast<double>(i);
  const auto d = wilcoxon_process(Series(x));
  std::size_t arg = 0;
  for (std::size_t k = 0; k <= 100; ++k)
    if (d(k) < d(arg)) arg = k;
  EXPECT_EQ(arg, 50u);
}

TEST(HodgesLehmann, HandExample) {
  const auto d = hodges_lehmann_process(Series({1, 2, 3, 10}));
  EXPECT_DOUBLE_EQ(d(2), -2.5);
  EXPECT_EQ(d(0), 0.0);
  EXPECT_EQ(d(4), 0.0);
}

TEST(HodgesLehmann, ConstantAndShift) {
  const auto flat = hodges_lehmann_process(Series(std::vector<double>(20, 1.5)));
  for (double v : flat.values()) EXPECT_EQ(v, 0.0);
  const auto x = oracle::normal_series(80, 6);
  std::vector<double> y(x);
  for (auto& v : y) v += 100.0;
  const auto a = hodges_lehmann_process(Series(x));
  const auto b = hodges_lehmann_process(Series(y));
  for (std::size_t k = 0; k <= 80; ++k) EXPECT_NEAR(a(k), b(k), 1e-10);
}

TEST(HodgesLehmann, MatchesEnumerationOracle) {
  const auto x = oracle::normal_series(70, 7);
  expect_process_near(hodges_lehmann_process(Series(x)), oracle::hodges_lehmann(x), 1e-12);
}

TEST(HodgesLehmann, FastAndNaivePathsAgree) {
  for (std::uint64_t seed : {11, 12}) {
    auto x = oracle::normal_series(260, seed);
    if (seed == 12)
      for (auto& v : x) v = std::round(v * 2.0);
    const auto a = hodges_lehmann_process_naive(Series(x));
    const auto b = hodges_lehmann_process_fast(Series(x));
    for (std::size_t k = 0; k <= x.size(); ++k) EXPECT_EQ(a(k), b(k)) << "k=" << k;
  }
}

TEST(Plugin, MeanEstimatorReproducesCusum) {
  const auto x = oracle::normal_series(90, 8);
  const auto a = plugin_process(Series(x), WindowEstimator::mean());
  const auto b = cusum_process(Series(x));
  for (std::size_t k = 0; k <= 90; ++k) EXPECT_NEAR(a(k), b(k), 1e-10);
}

TEST(Plugin, MedianHandExample) {
  const auto d = plugin_process(Series({1, 2, 3, 4}), WindowEstimator::median());
  EXPECT_DOUBLE_EQ(d(2), -1.0);
}

TEST(Plugin, VarianceOnConstantIsZero) {
  const auto d = plugin_process(Series(std::vector<double>(30, 2.0)), WindowEstimator::variance());
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
}

TEST(Plugin, EstimatorFailureNamesIndex) {
  WindowEstimator bad;
  bad.estimate = [](const Series&, std::size_t s, std::size_t) -> double {
    if (s == 5) throw std::runtime_error("boom");
    return 0.0;
  };
  try {
    plugin_process(Series(oracle::normal_series(10, 1)), bad);
    FAIL() << "expected a throw";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("k = 4"), std::string::npos);
  }
}

TEST(MultivariatePlugin, ScalarReductionAndComponents) {
  const auto a = oracle::normal_series(60, 9);
  const auto b = oracle::normal_series(60, 10);
  const auto one = multivariate_plugin_process(MultiSeries::from_columns({a}), VectorWindowEstimator::mean());
  const auto scalar = plugin_process(Series(a), WindowEstimator::mean());
  for (std::size_t k = 0; k <= 60; ++k) EXPECT_NEAR(one.at(k, 0), scalar(k), 1e-12);

  const auto two = multivariate_plugin_process(MultiSeries::from_columns({a, b}), VectorWindowEstimator::mean());
  const auto ca = oracle::cusum(a), cb = oracle::cusum(b);
  for (std::size_t k = 0; k <= 60; ++k) {
    EXPECT_NEAR(two.at(k, 0), ca[k], 1e-12);
    EXPECT_NEAR(two.at(k, 1), cb[k], 1e-12);
  }

  const auto dup = multivariate_plugin_process(MultiSeries::from_columns({a, a}), VectorWindowEstimator::mean());
  for (std::size_t k = 0; k <= 60; ++k) EXPECT_EQ(dup.at(k, 0), dup.at(k, 1));
}

TEST(MultivariatePlugin, DimensionMismatch) {
  VectorWindowEstimator est;
  est.estimate = [](const MultiSeries&, std::size_t, std::size_t) { return std::vector<double>{1.0}; };
  const auto a = oracle::normal_series(20, 1);
  EXPECT_THROW(multivariate_plugin_process(MultiSeries::from_columns({a, a}), est), InvalidArgument);
}

TEST(Detector, ParseNames) {
  EXPECT_EQ(parse_detector("cusum"), DetectorKind::Cusum);
  EXPECT_EQ(parse_detector("wilcoxon"), DetectorKind::Wilcoxon);
  EXPECT_EQ(parse_detector("hl"), DetectorKind::HodgesLehmann);
  EXPECT_EQ(parse_detector("plugin:mean"), DetectorKind::PluginMean);
  EXPECT_EQ(parse_detector("plugin:median"), DetectorKind::PluginMedian);
  EXPECT_EQ(parse_detector("plugin:var"), DetectorKind::PluginVariance);
  EXPECT_THROW(parse_detector("bogus"), InvalidArgument);
}
