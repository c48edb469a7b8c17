#include <gtest/gtest.h>

#include <cmath>

#include "lsncp/critval.hpp"
#include "lsncp/lsn.hpp"
#include "oracles.hpp"

using namespace lsncp;

TEST(Grid, ShapeAndMonotoneInAlpha) {
  const CritGrid& g = CritGrid::embedded();
  EXPECT_EQ(g.record_count(), 1083u);
  EXPECT_EQ(g.alphas(), (std::vector<double>{0.01, 0.05, 0.10}));
  ASSERT_EQ(g.ns().size(), 19u);
  ASSERT_EQ(g.rhos().size(), 19u);
  EXPECT_EQ(g.ns().front(), 100.0);
  EXPECT_EQ(g.ns().back(), 10000.0);
  for (std::size_t ni = 0; ni < 19; ++ni)
    for (std::size_t ri = 0; ri < 19; ++ri) {
      EXPECT_GE(g.cell(0, ni, ri), g.cell(1, ni, ri));
      EXPECT_GE(g.cell(1, ni, ri), g.cell(2, ni, ri));
      EXPECT_GT(g.cell(2, ni, ri), 0.0);
    }
}

TEST(Grid, TableEntries) {
  const CritGrid& g = CritGrid::embedded();
  EXPECT_EQ(lookup_critical_value(g, 0.05, 100, 0.0), 17.5);
  EXPECT_EQ(lookup_critical_value(g, 0.10, 200, 0.5), 20.0);
  EXPECT_EQ(lookup_critical_value(g, 0.01, 1000, -0.3), 22.7);
  EXPECT_EQ(lookup_critical_value(g, 0.05, 1000, 0.0), 19.0);
  EXPECT_EQ(lookup_critical_value(g, 0.10, 1000, 0.0), 17.1);
}

TEST(Grid, ExactAtEveryGridPoint) {
  const CritGrid& g = CritGrid::embedded();
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t ni = 0; ni < 19; ++ni)
      for (std::size_t ri = 0; ri < 19; ++ri)
        ASSERT_EQ(lookup_critical_value(g, g.alphas()[a], g.ns()[ni], g.rhos()[ri]), g.cell(a, ni, ri));
}

TEST(Grid, InterpolationIsBoundedByNeighbours) {
  const CritGrid& g = CritGrid::embedded();
  const double v = lookup_critical_value(g, 0.05, 150, 0.05);
  const double corners[] = {g.at(0.05, 100, 0.0), g.at(0.05, 100, 0.1), g.at(0.05, 200, 0.0), g.at(0.05, 200, 0.1)};
  EXPECT_GE(v, *std::min_element(std::begin(corners), std::end(corners)));
  EXPECT_LE(v, *std::max_element(std::begin(corners), std::end(corners)));
}

TEST(Grid, ClampsOutsideTheTable) {
  const CritGrid& g = CritGrid::embedded();
  EXPECT_EQ(lookup_critical_value(g, 0.05, 50, 0.0), g.at(0.05, 100, 0.0));
  EXPECT_EQ(lookup_critical_value(g, 0.05, 50000, 0.0), g.at(0.05, 10000, 0.0));
  EXPECT_EQ(lookup_critical_value(g, 0.05, 300, 0.97), g.at(0.05, 300, 0.9));
  EXPECT_EQ(lookup_critical_value(g, 0.05, 300, -0.99), g.at(0.05, 300, -0.9));
  EXPECT_THROW(lookup_critical_value(g, 0.02, 300, 0.0), InvalidArgument);
}

TEST(Grid, ParseRejectsBadTables) {
  EXPECT_THROW(CritGrid::parse("alpha,n,rho,value\n0.05,100,0.0,x\n"), InvalidArgument);
  EXPECT_THROW(CritGrid::parse("0.05,100,0.0,1\n0.05,200,0.1,2\n"), InvalidArgument);
  EXPECT_THROW(CritGrid::parse(""), InvalidArgument);
  const auto g = CritGrid::parse("0.05,100,0.0,1\n0.05,100,0.1,2\n");
  EXPECT_EQ(lookup_critical_value(g, 0.05, 100, 0.05), 1.5);
}

TEST(Rho, DegenerateDifferences) {
  EXPECT_THROW(lag1_acf_differenced(Series({1, 0, 1, 0, 1, 0, 1, 0})), DegenerateData);
  EXPECT_THROW(lag1_acf_differenced(Series({1, 2, 3, 4, 5})), InvalidArgument);
}

TEST(Rho, MatchesDirectComputation) {
  const auto x = oracle::normal_series(500, 3);
  const std::size_t b = 7;
  std::vector<double> d;
  for (std::size_t t = 0; t + b < x.size(); ++t) d.push_back((x[t + b] - x[t]) / std::sqrt(2.0));
  const auto r = lag1_acf_differenced(Series(x));
  EXPECT_EQ(r.lag, b);
  EXPECT_NEAR(r.raw, oracle::lag1_acf_centered(d), 1e-12);
}

TEST(Rho, IidAndAutoregressive) {
  CounterRng rng(5, 0);
  const auto iid = oracle::normal_series(5000, 4);
  EXPECT_LT(std::abs(lag1_acf_differenced(Series(iid)).raw), 0.05);
  const double phi = 0.5;
  const auto ar = simulate_ar1(5000, phi, rng);
  const std::size_t b = 17;
  const double rho_d = (2 * phi - std::pow(phi, b + 1) - std::pow(phi, b - 1)) / (2 * (1 - std::pow(phi, b)));
  EXPECT_NEAR(lag1_acf_differenced(Series(ar)).raw, rho_d, 0.05);
}

TEST(Rho, ClampedForLookup) {
  CounterRng rng(6, 0);
  const auto r = lag1_acf_differenced(Series(simulate_ar1(3000, 0.99, rng)));
  EXPECT_LE(r.clamped, 0.9);
  EXPECT_EQ(r.clamped, std::min(r.raw, 0.9));
}

TEST(Rho, RobustToAModerateMeanShift) {
  auto x = oracle::normal_series(2000, 7);
  const double base = lag1_acf_differenced(Series(x)).raw;
  for (std::size_t i = 1000; i < 2000; ++i) x[i] += 1.0;
  EXPECT_LT(std::abs(lag1_acf_differenced(Series(x)).raw - base), 0.05);
}

TEST(NullSim, DeterministicAndValidated) {
  const auto a = simulate_null_distribution(100, 0.3, 0.1, 100, 9);
  const auto b = simulate_null_distribution(100, 0.3, 0.1, 100, 9);
  EXPECT_EQ(a.sorted, b.sorted);
  EXPECT_TRUE(std::is_sorted(a.sorted.begin(), a.sorted.end()));
  EXPECT_EQ(a.reps, 100u);
  EXPECT_THROW(simulate_null_distribution(100, 1.0, 0.1, 100, 9), InvalidArgument);
  EXPECT_THROW(simulate_null_distribution(100, 0.0, 0.1, 99, 9), InvalidArgument);
}

TEST(NullSim, SmallSampleQuantile) {
  const auto nd = simulate_null_distribution(100, 0.0, 0.1, 2000, 21);
  EXPECT_NEAR(nd.quantile(0.90), 15.5, 0.6);
}

TEST(PValue, AddOneRule) {
  const auto nd = simulate_null_distribution(100, 0.0, 0.1, 2000, 22);
  EXPECT_NEAR(p_value(nd.sorted.front() - 1.0, nd), 1.0, 1.0 / 2001);
  EXPECT_DOUBLE_EQ(p_value(nd.sorted.back() + 1.0, nd), 1.0 / 2001);
  const double p = p_value(nd.quantile(0.95), nd);
  EXPECT_GE(p, 0.04);
  EXPECT_LE(p, 0.06);
  double prev = 1.0;
  for (double s = 0.0; s < 40.0; s += 0.5) {
    const double q = p_value(s, nd);
    EXPECT_LE(q, prev);
    EXPECT_GT(q, 0.0);
    prev = q;
  }
}

TEST(Fgn, AutocovarianceAndSampleAcf) {
  EXPECT_DOUBLE_EQ(fgn_autocovariance(0.5, 1), 0.0);
  EXPECT_DOUBLE_EQ(fgn_autocovariance(0.75, 0), 1.0);
  const double target = 0.5 * (std::pow(2.0, 1.5) - 2.0);
  EXPECT_NEAR(fgn_autocovariance(0.75, 1), target, 1e-15);
  const FgnGenerator gen(0.75, 4096);
  double acc = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    CounterRng rng(13, r);
    const auto path = gen.sample(rng);
    ASSERT_EQ(path.size(), 4096u);
    double m = 0.0;
    for (double v : path) m += v;
    m /= 4096.0;
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t t = 0; t < 4096; ++t) {
      g0 += (path[t] - m) * (path[t] - m);
      if (t + 1 < 4096) g1 += (path[t] - m) * (path[t + 1] - m);
    }
    acc += g1 / g0;
  }
  EXPECT_NEAR(acc / 200.0, target, 0.02);
}

TEST(Fgn, DeterministicAndValidated) {
  const auto a = simulate_null_distribution_fbm(0.7, 150, 0.1, 100, 3);
  const auto b = simulate_null_distribution_fbm(0.7, 150, 0.1, 100, 3);
  EXPECT_EQ(a.sorted, b.sorted);
  EXPECT_EQ(a.hurst, 0.7);
  EXPECT_THROW(FgnGenerator(1.0, 100), InvalidArgument);
  EXPECT_THROW(FgnGenerator(0.0, 100), InvalidArgument);
}

TEST(FullTest, ConstantSeries) {
  const auto r = full_test(Series(std::vector<double>(200, 4.0)), DetectorKind::Cusum);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_FALSE(r.reject);
  EXPECT_EQ(r.rho_hat, 0.0);
  EXPECT_TRUE(std::isnan(r.rho_hat_raw));
}

TEST(FullTest, SizeOnIidData) {
  int rejections = 0;
  for (std::uint64_t s = 0; s < 1000; ++s)
    rejections += full_test(Series(oracle::normal_series(200, 5000 + s)), DetectorKind::Cusum).reject;
  EXPECT_GE(rejections, 30);
  EXPECT_LE(rejections, 80);
}

TEST(FullTest, StrongTwoChangeAlternative) {
  int rejections = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto x = oracle::normal_series(200, 7000 + s);
    for (std::size_t i = 66; i < 133; ++i) x[i] += 4.0;
    rejections += full_test(Series(x), DetectorKind::Cusum).reject;
  }
  EXPECT_GE(rejections, 198);
}

TEST(FullTest, AlphaOutsideTableNeedsSimulation) {
  const Series x(oracle::normal_series(150, 8));
  TestOptions opt;
  opt.alpha = 0.2;
  EXPECT_THROW(full_test(x, DetectorKind::Cusum, opt), InvalidArgument);
  opt.simulate_pvalue = true;
  opt.reps = 200;
  const auto r = full_test(x, DetectorKind::Cusum, opt);
  ASSERT_TRUE(r.p_value.has_value());
  EXPECT_EQ(r.reject, r.statistic > r.critical_value);
}

TEST(FullTest, SimulatedPValueConsistentWithDecision) {
  auto x = oracle::normal_series(200, 9);
  for (std::size_t i = 100; i < 200; ++i) x[i] += 3.0;
  TestOptions opt;
  opt.simulate_pvalue = true;
  opt.reps = 300;
  const auto r = full_test(Series(x), DetectorKind::Wilcoxon, opt);
  EXPECT_TRUE(r.reject);
  EXPECT_LT(*r.p_value, 0.05);
  EXPECT_GE(r.elapsed_seconds, 0.0);
}

TEST(MultiNull, DeterministicQuadraticForm) {
  const auto a = simulate_null_distribution_multi(120, {0.0, 0.3}, 0.1, 100, 4);
  const auto b = simulate_null_distribution_multi(120, {0.0, 0.3}, 0.1, 100, 4);
  EXPECT_EQ(a.sorted, b.sorted);
  EXPECT_GT(a.quantile(0.5), 0.0);
}
