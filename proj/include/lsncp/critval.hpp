#pragma once

// Critical values and p-values for the mean-aggregated LSN statistic:
// the embedded finite-n table c_alpha(n, rho), the lag-1 ACF of lag-b
// differences used to index it, and Monte Carlo null distributions.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsncp/core.hpp"
#include "lsncp/detectors.hpp"

namespace lsncp {

/// c_alpha(n, rho) on a rectangular (n, rho) grid for each alpha.
class CritGrid {
 public:
  /// Parses `alpha,n,rho,value` records (header line optional). Every
  /// (alpha, n, rho) combination of the observed axes must be present.
  static CritGrid parse(std::string_view csv);
  /// The table shipped with the library.
  static const CritGrid& embedded();

  const std::vector<double>& alphas() const noexcept { return alphas_; }
  const std::vector<double>& ns() const noexcept { return ns_; }
  const std::vector<double>& rhos() const noexcept { return rhos_; }

  bool has_alpha(double alpha) const noexcept;
  /// Table entry at exact grid coordinates.
  double at(double alpha, double n, double rho) const;
  /// Entry by axis indices.
  double cell(std::size_t alpha_idx, std::size_t n_idx, std::size_t rho_idx) const;
  std::size_t alpha_index(double alpha) const;
  std::size_t record_count() const noexcept { return values_.size(); }

 private:
  std::vector<double> alphas_;
  std::vector<double> ns_;
  std::vector<double> rhos_;
  std::vector<double> values_;  // [alpha][n][rho]
};

/// Raw CSV text of the embedded table.
std::string_view embedded_critical_value_csv();

inline constexpr double kRhoClamp = 0.9;

struct RhoEstimate {
  double raw = 0.0;      // gamma(1) / gamma(0) of the differenced series
  double clamped = 0.0;  // raw clamped to [-0.9, 0.9]
  std::size_t lag = 0;   // b = floor(n^{1/3})
};

/// b = floor(n^{1/3}), D_t = (X_{t+b} - X_t)/sqrt(2) for t = 1..n-b, and the
/// lag-1 sample autocorrelation of D with mean-centered products.
/// Throws InvalidArgument if n < 2b + 4 and DegenerateData if D is constant.
RhoEstimate lag1_acf_differenced(const Series& x);

/// Bilinear interpolation in (rho, log n) with n clamped to [100, 10000] and
/// rho to [-0.9, 0.9]; exact at grid points. Throws for alphas not in the grid.
double lookup_critical_value(const CritGrid& grid, double alpha, double n, double rho);

/// Sorted Monte Carlo sample of the null statistic.
struct NullDistribution {
  std::vector<double> sorted;
  std::size_t n = 0;
  double rho = 0.0;
  std::optional<double> hurst;
  double epsilon = 0.1;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  DetectorKind detector = DetectorKind::Cusum;

  /// Smallest draw with empirical CDF >= p.
  double quantile(double p) const { return empirical_quantile(sorted, p); }
};

/// Stationary AR(1) path with standard normal innovations after a 1000-step burn-in.
std::vector<double> simulate_ar1(std::size_t n, double rho, CounterRng& rng);
inline constexpr std::size_t kBurnIn = 1000;

/// reps draws of the mean-aggregated LSN statistic on AR(1)(rho) noise.
/// Replication r uses stream r of `seed`; the result does not depend on the
/// number of worker threads.
NullDistribution simulate_null_distribution(std::size_t n, double rho, double epsilon, std::size_t reps,
                                            std::uint64_t seed, DetectorKind detector = DetectorKind::Cusum);

/// Exact fractional Gaussian noise by circulant embedding (Davies-Harte).
/// The eigenvalues are computed once per (H, n); sample() is thread-safe.
class FgnGenerator {
 public:
  FgnGenerator(double hurst, std::size_t n);
  ~FgnGenerator();
  FgnGenerator(const FgnGenerator&) = delete;
  FgnGenerator& operator=(const FgnGenerator&) = delete;

  std::vector<double> sample(CounterRng& rng) const;
  double hurst() const noexcept { return hurst_; }
  std::size_t n() const noexcept { return n_; }

 private:
  double hurst_;
  std::size_t n_;
  std::size_t m_;
  std::vector<double> sqrt_lambda_;  // sqrt(lambda_j / m)
  void* plan_ = nullptr;
};

/// gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
double fgn_autocovariance(double hurst, std::size_t lag);

NullDistribution simulate_null_distribution_fbm(double hurst, std::size_t n, double epsilon, std::size_t reps,
                                                std::uint64_t seed);

/// Null of the mean-aggregated multivariate quadratic-form statistic built on
/// column-wise subsample means; column c is AR(1)(rhos[c]) noise, the columns
/// being independent.
NullDistribution simulate_null_distribution_multi(std::size_t n, const std::vector<double>& rhos, double epsilon,
                                                  std::size_t reps, std::uint64_t seed);

/// Mean of the multivariate score curve of the column-mean plug-in process.
double multivariate_test_statistic(const MultiSeries& x, double epsilon);

/// (1 + #{draws >= stat}) / (reps + 1).
double p_value(double stat, const NullDistribution& null);

struct TestOptions {
  double epsilon = 0.1;
  double alpha = 0.05;
  bool simulate_pvalue = false;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::optional<double> hurst;  // long-range dependent null instead of AR(1)
};

struct TestResult {
  std::string test;
  std::size_t n = 0;
  double statistic = 0.0;
  double epsilon = 0.1;
  double alpha = 0.05;
  double rho_hat = 0.0;      // clamped value used for the lookup
  double rho_hat_raw = 0.0;  // NaN when the differences are constant
  double critical_value = 0.0;
  std::optional<double> p_value;
  bool reject = false;
  double elapsed_seconds = 0.0;
};

/// rho_hat, critical value, statistic, decision. With options.hurst set the
/// critical value and p-value come from the fractional null; alphas outside
/// the table require simulate_pvalue and use the simulated quantile.
TestResult full_test(const Series& x, DetectorKind kind, const TestOptions& options = {},
                     const CritGrid& grid = CritGrid::embedded());

}  // namespace lsncp
