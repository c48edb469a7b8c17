#pragma once

// Slow reference computations written straight from the data, in long
// double, without touching the library's processes or prefix sums.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline Vec normal_series(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, sd);
  Vec v(n);
  for (auto& x : v) x = z(gen);
  return v;
}

inline long double sum(const Vec& x, std::size_t a, std::size_t b) {  // 1-based, inclusive
  long double s = 0.0L;
  for (std::size_t i = a; i <= b; ++i) s += x[i - 1];
  return s;
}

inline Vec cusum(const Vec& x) {
  const std::size_t n = x.size();
  const long double xbar = sum(x, 1, n) / n;
  Vec d(n + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    acc += x[k - 1] - xbar;
    d[k] = static_cast<double>(acc / std::sqrt(static_cast<long double>(n)));
  }
  return d;
}

// Average rank by counting.
inline Vec midranks(const Vec& x) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      if (y < x[i]) ++less;
      if (y == x[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline Vec wilcoxon(const Vec& x) {
  const std::size_t n = x.size();
  const Vec r = midranks(x);
  long double total = 0.0L;
  for (double v : r) total += v;
  Vec d(n + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    acc += r[k - 1];
    d[k] = static_cast<double>((acc - total * k / n) / std::pow(static_cast<long double>(n), 1.5L));
  }
  return d;
}

// n^{-3/2} sum_{i<=k<j} (1{x_i <= x_j} - 1/2).
inline double wilcoxon_pairwise(const Vec& x, std::size_t k) {
  const std::size_t n = x.size();
  long double s = 0.0L;
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = k + 1; j <= n; ++j) s += (x[i - 1] <= x[j - 1] ? 1.0L : 0.0L) - 0.5L;
  return static_cast<double>(s / std::pow(static_cast<long double>(n), 1.5L));
}

inline double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline Vec hodges_lehmann(const Vec& x) {
  const std::size_t n = x.size();
  Vec d(n + 1, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    Vec diffs;
    for (std::size_t i = 1; i <= k; ++i)
      for (std::size_t j = k + 1; j <= n; ++j) diffs.push_back(x[i - 1] - x[j - 1]);
    d[k] = static_cast<double>(k) * static_cast<double>(n - k) * median(diffs) / std::pow(static_cast<double>(n), 1.5);
  }
  return d;
}

// Localized CUSUM from the data: len^{-1/2} sum_{i=s..k} (x_i - mean_{s..e}).
inline long double localized(const Vec& x, std::size_t s, std::size_t k, std::size_t e) {
  const long double len = static_cast<long double>(e - s + 1);
  const long double m = sum(x, s, e) / len;
  long double acc = 0.0L;
  for (std::size_t i = s; i <= k; ++i) acc += x[i - 1] - m;
  return acc / std::sqrt(len);
}

// Sum over j = a..b of (partial sums of x_i - mean_{a..b} from a to j)^2.
inline long double bridge_energy(const Vec& x, std::size_t a, std::size_t b) {
  const long double m = sum(x, a, b) / static_cast<long double>(b - a + 1);
  long double acc = 0.0L, total = 0.0L;
  for (std::size_t j = a; j <= b; ++j) {
    acc += x[j - 1] - m;
    total += acc * acc;
  }
  return total;
}

inline long double self_normalizer(const Vec& x, std::size_t s, std::size_t k, std::size_t e) {
  const long double len = static_cast<long double>(e - s + 1);
  return (bridge_energy(x, s, k) + bridge_energy(x, k + 1, e)) / (len * len);
}

// T(k|s,e) for the CUSUM process; 0 off the valid range or for a vanishing
// self-normalizer.
inline double lsn(const Vec& x, std::size_t s, std::size_t k, std::size_t e) {
  const std::size_t n = x.size();
  if (!(s >= 1 && s <= k && k < e && e <= n)) return 0.0;
  const long double v = self_normalizer(x, s, k, e);
  long double scale = 0.0L;
  for (std::size_t i = s; i <= e; ++i) scale += static_cast<long double>(x[i - 1]) * x[i - 1];
  if (v <= 1e-20L * std::max(scale, 1e-300L)) return 0.0;
  const long double l = localized(x, s, k, e);
  return static_cast<double>(l * l / v);
}

// Shao's V_n(k) with backward partial sums on the right.
inline double shao_v(const Vec& x, std::size_t k) {
  const std::size_t n = x.size();
  const long double s1k = sum(x, 1, k), skn = sum(x, k + 1, n);
  long double left = 0.0L, right = 0.0L;
  for (std::size_t j = 1; j <= k; ++j) {
    const long double t = sum(x, 1, j) - static_cast<long double>(j) / k * s1k;
    left += t * t;
  }
  for (std::size_t j = k + 1; j <= n; ++j) {
    const long double t = sum(x, j, n) - static_cast<long double>(n - j + 1) / (n - k) * skn;
    right += t * t;
  }
  return static_cast<double>((left + right) / (static_cast<long double>(n) * n));
}

inline double shao_score(const Vec& x, std::size_t k) {
  const std::size_t n = x.size();
  const long double c = (sum(x, 1, k) - static_cast<long double>(k) / n * sum(x, 1, n)) / std::sqrt((long double)n);
  const double v = shao_v(x, k);
  return v > 0.0 ? static_cast<double>(c * c / v) : 0.0;
}

inline std::size_t trim(double eps, std::size_t n) {
  return static_cast<std::size_t>(std::floor(eps * static_cast<double>(n) + 1e-9));
}

// Symmetric-window score curve by enumeration; index i is k = trim+1+i.
inline Vec score_curve(const Vec& x, double eps) {
  const std::size_t n = x.size(), h = trim(eps, n);
  Vec out;
  for (std::size_t k = h + 1; k + h + 1 <= n; ++k) {
    double best = 0.0;
    for (std::size_t d = h; d + 1 <= k && k + 1 + d <= n; ++d) best = std::max(best, lsn(x, k - d, k, k + 1 + d));
    out.push_back(best);
  }
  return out;
}

inline double shao_m2(const Vec& x, double eps) {
  const std::size_t n = x.size(), h = std::max<std::size_t>(trim(eps, n), 1);
  double best = 0.0;
  for (std::size_t k1 = 1; k1 <= n; ++k1)
    for (std::size_t k2 = k1 + 1; k2 <= n; ++k2) {
      if (k1 - 1 < h || k2 - k1 < h || n - k2 < h) continue;
      best = std::max(best, lsn(x, 1, k1, k2) + lsn(x, k1, k2, n));
    }
  return best;
}

inline double zhang(const Vec& x, double eps) {
  const std::size_t n = x.size(), h = std::max<std::size_t>(trim(eps, n), 1);
  double f = 0.0, b = 0.0;
  for (std::size_t k1 = 1; k1 <= n; ++k1)
    for (std::size_t k2 = k1 + 1; k2 <= n; ++k2) {
      if (k1 - 1 < h || k2 - k1 < h || n - k2 < h) continue;
      f = std::max(f, lsn(x, 1, k1, k2));
      b = std::max(b, lsn(x, k1, k2, n));
    }
  return f + b;
}

// Kolmogorov distribution by its alternating series with 100 terms.
inline double kolmogorov_cdf(double t) {
  if (t <= 0.0) return 0.0;
  long double s = 0.0L;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 1.0L : -1.0L) * std::exp(-2.0L * k * k * t * t);
  return static_cast<double>(1.0L - 2.0L * s);
}

inline double lag1_acf_centered(const Vec& d) {
  long double m = 0.0L;
  for (double v : d) m += v;
  m /= d.size();
  long double g0 = 0.0L, g1 = 0.0L;
  for (std::size_t t = 0; t < d.size(); ++t) {
    g0 += (d[t] - m) * (d[t] - m);
    if (t + 1 < d.size()) g1 += (d[t] - m) * (d[t + 1] - m);
  }
  return static_cast<double>(g1 / g0);
}

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
inline double two_sample_ks_p(Vec a, Vec b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    dmax = std::max(dmax, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  const double ne = double(a.size()) * b.size() / (a.size() + b.size());
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * dmax;
  return std::clamp(1.0 - kolmogorov_cdf(lam), 0.0, 1.0);
}

}  // namespace oracle
