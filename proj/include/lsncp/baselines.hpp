#pragma once

// Competing change-point tests: Kolmogorov-Smirnov with a Bartlett long-run
// variance, the self-normalized one-change and m-change statistics, and the
// unsupervised forward/backward self-normalized statistic.

#include <optional>
#include <string>
#include <vector>

#include "lsncp/core.hpp"
#include "lsncp/critval.hpp"

namespace lsncp {

struct LrvEstimate {
  double variance = 0.0;
  std::size_t bandwidth = 0;
  std::string kernel = "bartlett";
};

/// floor(1.3 n^{1/3}).
std::size_t default_lrv_bandwidth(std::size_t n);

/// gamma(0) + 2 sum_{h=1}^{B} (1 - h/(B+1)) gamma(h) of the demeaned series,
/// autocovariances with divisor n. Throws DegenerateData for constant input.
LrvEstimate lrv_bartlett(const Series& x, std::optional<std::size_t> bandwidth = std::nullopt);

/// P(sup |Brownian bridge| <= x).
double kolmogorov_cdf(double x);
/// Inverse of kolmogorov_cdf by bisection.
double kolmogorov_quantile(double p);

/// sup_k |C_n(k)| / sigma_hat with an asymptotic p-value; rejects when the
/// statistic exceeds the (1 - alpha) Kolmogorov quantile.
TestResult ks_test(const Series& x, double alpha = 0.05, std::optional<std::size_t> bandwidth = std::nullopt);

/// V_n(k) = n^{-2} [sum_{t<=k} (S_{1,t} - t/k S_{1,k})^2
///                + sum_{t>k} (S_{t,n} - (n-t+1)/(n-k) S_{k+1,n})^2]
/// from partial sums of the demeaned data.
double shao_self_normalizer(const Series& x, std::size_t k);

/// C_n(k)^2 / V_n(k) for k = 1..n-1 (index k-1), 0 where V_n vanishes.
std::vector<double> shao_one_cp_curve(const Series& x);
/// sup_k C_n(k)^2 / V_n(k).
double shao_one_cp(const Series& x);

/// sup over 1 = k_0 < k_1 < ... < k_m < k_{m+1} = n with all gaps at least
/// floor(eps n) of sum_j T(k_j | k_{j-1}, k_{j+1}); m in 1..3.
double shao_m_cp(const Series& x, std::size_t m, double epsilon);

/// sup_{(k1,k2)} T(k1 | 1, k2) + sup_{(k1,k2)} T(k2 | k1, n) over the same
/// trimmed region with m = 2.
double zhang_test(const Series& x, double epsilon);

}  // namespace lsncp
