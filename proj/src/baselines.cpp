#include "lsncp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "lsncp/detectors.hpp"
#include "lsncp/lsn.hpp"

namespace lsncp {

std::size_t default_lrv_bandwidth(std::size_t n) {
  return static_cast<std::size_t>(std::floor(1.3 * std::cbrt(static_cast<double>(n)) + 1e-9));
}

LrvEstimate lrv_bartlett(const Series& x, std::optional<std::size_t> bandwidth) {
  const std::size_t n = x.size();
  if (n < 8) throw InvalidArgument("long-run variance needs at least 8 observations");
  const std::size_t bw = std::min(bandwidth.value_or(default_lrv_bandwidth(n)), n - 1);
  const double xbar = mean(x.values());
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - xbar;
  auto gamma = [&](std::size_t h) {
    double acc = 0.0;
    for (std::size_t i = 0; i + h < n; ++i) acc += c[i] * c[i + h];
    return acc / static_cast<double>(n);
  };
  double v = gamma(0);
  for (std::size_t h = 1; h <= bw; ++h) {
    v += 2.0 * (1.0 - static_cast<double>(h) / static_cast<double>(bw + 1)) * gamma(h);
  }
  if (!(v > 0.0)) throw DegenerateData("long-run variance is zero (constant series)");
  return {v, bw, "bartlett"};
}

double kolmogorov_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  if (x < 1.0) {
    // Theta-function form converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double acc = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double odd = 2.0 * j - 1.0;
      acc += std::exp(-odd * odd * pi2 / (8.0 * x * x));
    }
    return std::sqrt(2.0 * std::numbers::pi) / x * acc;
  }
  double acc = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    acc += (j % 2 == 1) ? term : -term;
  }
  return std::clamp(1.0 - 2.0 * acc, 0.0, 1.0);
}

double kolmogorov_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
  double lo = 0.0;
  double hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TestResult ks_test(const Series& x, double alpha, std::optional<std::size_t> bandwidth) {
  const auto start = std::chrono::steady_clock::now();
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const LrvEstimate lrv = lrv_bartlett(x, bandwidth);
  const GlobalProcess c = cusum_process(x);
  double sup = 0.0;
  for (double v : c.values()) sup = std::max(sup, std::abs(v));
  TestResult r;
  r.test = "ks";
  r.n = x.size();
  r.alpha = alpha;
  r.epsilon = 0.0;
  r.statistic = sup / std::sqrt(lrv.variance);
  r.critical_value = kolmogorov_quantile(1.0 - alpha);
  r.p_value = 1.0 - kolmogorov_cdf(r.statistic);
  r.reject = r.statistic > r.critical_value;
  r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

// Partial sums S(t) = sum_{i<=t} (x_i - xbar), t = 0..n.
std::vector<double> centered_partial_sums(const Series& x) {
  const std::size_t n = x.size();
  const double xbar = mean(x.values());
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) s[i] = s[i - 1] + (x[i - 1] - xbar);
  return s;
}

double shao_v(const std::vector<double>& s, std::size_t k) {
  const std::size_t n = s.size() - 1;
  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  double left = 0.0;
  for (std::size_t t = 1; t <= k; ++t) {
    const double u = s[t] - static_cast<double>(t) / kd * s[k];
    left += u * u;
  }
  double right = 0.0;
  const double tail = s[n] - s[k];
  for (std::size_t t = k + 1; t <= n; ++t) {
    const double u = (s[n] - s[t - 1]) - static_cast<double>(n - t + 1) / rest * tail;
    right += u * u;
  }
  const double nd = static_cast<double>(n);
  return (left + right) / (nd * nd);
}

void check_one_cp_input(const Series& x) {
  if (x.size() < 2) throw InvalidArgument("series too short");
}

}  // namespace

double shao_self_normalizer(const Series& x, std::size_t k) {
  check_one_cp_input(x);
  if (k < 1 || k >= x.size()) throw InvalidArgument("split index out of range");
  return shao_v(centered_partial_sums(x), k);
}

std::vector<double> shao_one_cp_curve(const Series& x) {
  check_one_cp_input(x);
  const std::size_t n = x.size();
  const auto s = centered_partial_sums(x);
  const double nd = static_cast<double>(n);
  double scale = 0.0;
  for (double v : s) scale += v * v / nd;
  scale *= nd / (nd + 1.0);
  std::vector<double> out(n - 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double v = shao_v(s, k);
    if (!(v > kDegenerateRelTol * scale)) continue;
    const double c2 = s[k] * s[k] / nd;
    out[k - 1] = c2 / v;
  }
  return out;
}

double shao_one_cp(const Series& x) {
  const auto curve = shao_one_cp_curve(x);
  return curve.empty() ? 0.0 : *std::max_element(curve.begin(), curve.end());
}

double shao_m_cp(const Series& x, std::size_t m, double epsilon) {
  if (m < 1 || m > 3) throw InvalidArgument("m must be 1, 2 or 3");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 1/2)");
  const std::size_t n = x.size();
  const std::size_t h = std::max<std::size_t>(trim_count(epsilon, n), 1);
  if (1 + (m + 1) * h > n) throw InvalidArgument("series too short for the spacing constraint");
  const LsnKernel kern(cusum_process(x));
  const auto t = [&](std::size_t s, std::size_t k, std::size_t e) {
    const Window w{s, k, e};
    return w.valid(n) ? kern.stat(w) : 0.0;
  };
  double best = 0.0;
  if (m == 1) {
    for (std::size_t k1 = 1 + h; k1 + h <= n; ++k1) best = std::max(best, t(1, k1, n));
    return best;
  }
  if (m == 2) {
    std::vector<double> partial(n + 1, 0.0);
    parallel_for(n + 1, [&](std::size_t k1) {
      if (k1 < 1 + h || k1 + 2 * h > n) return;
      double local = 0.0;
      for (std::size_t k2 = k1 + h; k2 + h <= n; ++k2) local = std::max(local, t(1, k1, k2) + t(k1, k2, n));
      partial[k1] = local;
    });
    return *std::max_element(partial.begin(), partial.end());
  }
  std::vector<double> partial(n + 1, 0.0);
  parallel_for(n + 1, [&](std::size_t k1) {
    if (k1 < 1 + h || k1 + 3 * h > n) return;
    double local = 0.0;
    for (std::size_t k2 = k1 + h; k2 + 2 * h <= n; ++k2) {
      const double a = t(1, k1, k2);
      for (std::size_t k3 = k2 + h; k3 + h <= n; ++k3) local = std::max(local, a + t(k1, k2, k3) + t(k2, k3, n));
    }
    partial[k1] = local;
  });
  return *std::max_element(partial.begin(), partial.end());
}

double zhang_test(const Series& x, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 1/2)");
  const std::size_t n = x.size();
  const std::size_t h = std::max<std::size_t>(trim_count(epsilon, n), 1);
  if (1 + 3 * h > n) throw InvalidArgument("series too short for the spacing constraint");
  const LsnKernel kern(cusum_process(x));
  double forward = 0.0;
  double backward = 0.0;
  for (std::size_t k1 = 1 + h; k1 + 2 * h <= n; ++k1) {
    for (std::size_t k2 = k1 + h; k2 + h <= n; ++k2) {
      forward = std::max(forward, kern.stat({1, k1, k2}));
      backward = std::max(backward, kern.stat({k1, k2, n}));
    }
  }
  return forward + backward;
}

}  // namespace lsncp
