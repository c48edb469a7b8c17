#include "lsncp/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lsncp {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Cusum: return "cusum";
    case DetectorKind::Wilcoxon: return "wilcoxon";
    case DetectorKind::HodgesLehmann: return "hl";
    case DetectorKind::PluginMean: return "plugin:mean";
    case DetectorKind::PluginMedian: return "plugin:median";
    case DetectorKind::PluginVariance: return "plugin:var";
    case DetectorKind::Multivariate: return "multivariate";
  }
  return "unknown";
}

DetectorKind parse_detector(std::string_view name) {
  if (name == "cusum") return DetectorKind::Cusum;
  if (name == "wilcoxon") return DetectorKind::Wilcoxon;
  if (name == "hl" || name == "hodges-lehmann") return DetectorKind::HodgesLehmann;
  if (name == "plugin:mean") return DetectorKind::PluginMean;
  if (name == "plugin:median") return DetectorKind::PluginMedian;
  if (name == "plugin:var") return DetectorKind::PluginVariance;
  throw InvalidArgument("unknown detector '" + std::string(name) + "'");
}

GlobalProcess::GlobalProcess(std::vector<double> values, DetectorKind kind)
    : values_(std::move(values)), kind_(kind) {
  if (values_.size() < 2) throw InvalidArgument("process needs n >= 1");
  if (values_.front() != 0.0) throw InvalidArgument("process must satisfy D(0) = 0");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("process contains a non-finite value");
  }
}

VectorProcess::VectorProcess(std::size_t n, std::size_t q, std::vector<double> row_major)
    : n_(n), q_(q), data_(std::move(row_major)) {
  if (q_ == 0 || data_.size() != (n_ + 1) * q_) throw InvalidArgument("vector process has wrong shape");
}

GlobalProcess VectorProcess::component(std::size_t c) const {
  std::vector<double> v(n_ + 1);
  for (std::size_t k = 0; k <= n_; ++k) v[k] = at(k, c);
  return GlobalProcess(std::move(v), DetectorKind::Multivariate);
}

double median_inplace(std::vector<double>& v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  const std::size_t m = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (m % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

void require_length(const Series& x, std::size_t min_n, std::string_view what) {
  if (x.size() < min_n) {
    throw InvalidArgument(std::string(what) + ": series too short (n = " + std::to_string(x.size()) +
                          ", need >= " + std::to_string(min_n) + ")");
  }
}

std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    // positions i..j (0-based) share ranks i+1..j+1
    const double avg = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  return rank;
}

// r-th smallest (0-based) of {a[i] + c[j]} for ascending a and c. Each round
// draws a pivot uniformly from the surviving cells, counts cells below and
// at the pivot with a staircase walk, and discards the side that cannot hold
// rank r.
class SortedSumSelector {
 public:
  SortedSumSelector(std::span<const double> a, std::span<const double> c, std::uint64_t seed)
      : a_(a), c_(c), state_(seed | 1) {}

  double select(std::size_t r) {
    const std::size_t rows = a_.size();
    const std::size_t cols = c_.size();
    std::vector<std::size_t> lo(rows, 0), hi(rows, cols);
    std::vector<std::size_t> lt(rows), le(rows);
    std::size_t active = rows * cols;
    for (;;) {
      if (active <= 64) return finish(lo, hi, r);
      const double pivot = pick(lo, hi, active);

      // Staircases over the full matrix: lt[i] = #{j : a_i + c_j < pivot}.
      std::size_t p_lt = cols, p_le = cols;
      for (std::size_t i = 0; i < rows; ++i) {
        while (p_lt > 0 && a_[i] + c_[p_lt - 1] >= pivot) --p_lt;
        while (p_le > 0 && a_[i] + c_[p_le - 1] > pivot) --p_le;
        lt[i] = std::clamp(p_lt, lo[i], hi[i]);
        le[i] = std::clamp(p_le, lo[i], hi[i]);
      }
      std::size_t count_lt = 0, count_le = 0;
      for (std::size_t i = 0; i < rows; ++i) {
        count_lt += lt[i] - lo[i];
        count_le += le[i] - lo[i];
      }
      if (r < count_lt) {
        hi = lt;
        active = count_lt;
      } else if (r < count_le) {
        return pivot;
      } else {
        r -= count_le;
        active -= count_le;
        lo = le;
      }
    }
  }

 private:
  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

  double pick(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi, std::size_t active) {
    std::size_t target = static_cast<std::size_t>(next() % active);
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const std::size_t width = hi[i] - lo[i];
      if (target < width) return a_[i] + c_[lo[i] + target];
      target -= width;
    }
    return a_.back() + c_.back();  // unreachable
  }

  double finish(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi, std::size_t r) const {
    std::vector<double> rest;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      for (std::size_t j = lo[i]; j < hi[i]; ++j) rest.push_back(a_[i] + c_[j]);
    }
    std::nth_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(r), rest.end());
    return rest[r];
  }

  std::span<const double> a_;
  std::span<const double> c_;
  std::uint64_t state_;
};

}  // namespace

GlobalProcess cusum_process(const Series& x) {
  require_length(x, 2, "cusum_process");
  const std::size_t n = x.size();
  std::vector<double> d(n + 1, 0.0);
  const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
  if (*lo == *hi) return GlobalProcess(std::move(d), DetectorKind::Cusum);
  double total = 0.0;
  for (double v : x.values()) total += v;
  const double xbar = total / static_cast<double>(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  double acc = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    acc += x[k - 1] - xbar;
    d[k] = scale * acc;
  }
  d[n] = 0.0;  // full-sample centering
  return GlobalProcess(std::move(d), DetectorKind::Cusum);
}

GlobalProcess wilcoxon_process(const Series& x) {
  require_length(x, 2, "wilcoxon_process");
  const std::size_t n = x.size();
  const auto rank = midranks(x.values());
  const double nd = static_cast<double>(n);
  const double total = nd * (nd + 1.0) / 2.0;
  const double scale = std::pow(nd, -2.5);
  std::vector<double> d(n + 1, 0.0);
  // Midranks are multiples of 1/2, so n * acc - k * total is exact.
  double acc = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    acc += rank[k - 1];
    d[k] = scale * (nd * acc - static_cast<double>(k) * total);
  }
  return GlobalProcess(std::move(d), DetectorKind::Wilcoxon);
}

GlobalProcess hodges_lehmann_process_naive(const Series& x) {
  require_length(x, 2, "hodges_lehmann_process");
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  const double scale = std::pow(nd, -1.5);
  std::vector<double> d(n + 1, 0.0);
  std::vector<double> diffs;
  for (std::size_t k = 1; k < n; ++k) {
    diffs.clear();
    diffs.reserve(k * (n - k));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = k; j < n; ++j) diffs.push_back(x[i] - x[j]);
    }
    const double med = median_inplace(diffs);
    d[k] = scale * static_cast<double>(k) * static_cast<double>(n - k) * med;
  }
  return GlobalProcess(std::move(d), DetectorKind::HodgesLehmann);
}

GlobalProcess hodges_lehmann_process_fast(const Series& x) {
  require_length(x, 2, "hodges_lehmann_process");
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  const double scale = std::pow(nd, -1.5);
  std::vector<double> d(n + 1, 0.0);

  std::vector<double> left;  // ascending x_1..x_k
  left.reserve(n);
  std::vector<double> right(x.values().begin(), x.values().end());  // ascending x_{k+1}..x_n
  std::sort(right.begin(), right.end());
  std::vector<double> neg_right;  // ascending -x_j over the right block
  neg_right.reserve(n);

  for (std::size_t k = 1; k < n; ++k) {
    const double v = x[k - 1];
    left.insert(std::upper_bound(left.begin(), left.end(), v), v);
    right.erase(std::lower_bound(right.begin(), right.end(), v));
    neg_right.assign(right.rbegin(), right.rend());
    for (double& w : neg_right) w = -w;

    const std::size_t count = k * (n - k);
    SortedSumSelector selector(left, neg_right, mix64(k + 0x51ed27ULL));
    const double upper = selector.select(count / 2);
    const double med = (count % 2 == 1) ? upper : 0.5 * (selector.select(count / 2 - 1) + upper);
    d[k] = scale * static_cast<double>(k) * static_cast<double>(n - k) * med;
  }
  return GlobalProcess(std::move(d), DetectorKind::HodgesLehmann);
}

GlobalProcess hodges_lehmann_process(const Series& x) {
  return x.size() <= kHodgesLehmannEnumerationLimit ? hodges_lehmann_process_naive(x)
                                                     : hodges_lehmann_process_fast(x);
}

WindowEstimator WindowEstimator::mean() {
  return {[](const Series& x, std::size_t s, std::size_t e) {
            double acc = 0.0;
            for (std::size_t i = s; i <= e; ++i) acc += x[i - 1];
            return acc / static_cast<double>(e - s + 1);
          },
          1, 1, "mean"};
}

WindowEstimator WindowEstimator::median() {
  return {[](const Series& x, std::size_t s, std::size_t e) {
            std::vector<double> v(x.values().begin() + static_cast<std::ptrdiff_t>(s - 1),
                                  x.values().begin() + static_cast<std::ptrdiff_t>(e));
            return median_inplace(v);
          },
          1, 1, "median"};
}

WindowEstimator WindowEstimator::variance() {
  return {[](const Series& x, std::size_t s, std::size_t e) {
            const double m = static_cast<double>(e - s + 1);
            double acc = 0.0;
            for (std::size_t i = s; i <= e; ++i) acc += x[i - 1];
            const double mu = acc / m;
            double ss = 0.0;
            for (std::size_t i = s; i <= e; ++i) ss += (x[i - 1] - mu) * (x[i - 1] - mu);
            return ss / m;
          },
          1, 2, "variance"};
}

VectorWindowEstimator VectorWindowEstimator::mean() {
  return {[](const MultiSeries& x, std::size_t s, std::size_t e) {
            std::vector<double> acc(x.dim(), 0.0);
            for (std::size_t t = s; t <= e; ++t) {
              const auto r = x.row(t);
              for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += r[c];
            }
            for (double& v : acc) v /= static_cast<double>(e - s + 1);
            return acc;
          },
          1, 1};
}

namespace {

// Estimates that agree up to rounding (e.g. means of a constant stretch) count as equal.
double estimate_gap(double left, double right) {
  const double gap = left - right;
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(left), std::abs(right));
  return std::abs(gap) <= tol ? 0.0 : gap;
}

}  // namespace

GlobalProcess plugin_process(const Series& x, const WindowEstimator& est) {
  require_length(x, 2, "plugin_process");
  if (!est.estimate) throw InvalidArgument("plugin_process: estimator has no function");
  const std::size_t n = x.size();
  const std::size_t min_side = std::max<std::size_t>({est.block, est.min_size, 1});
  const double scale = std::pow(static_cast<double>(n), -1.5);
  std::vector<double> d(n + 1, 0.0);
  for (std::size_t k = min_side; k + min_side <= n; ++k) {
    double left = 0.0, right = 0.0;
    try {
      left = est.estimate(x, 1, k);
      right = est.estimate(x, k + 1, n);
    } catch (const std::exception& err) {
      throw InvalidArgument("plugin_process: estimator '" + est.name + "' failed at k = " + std::to_string(k) +
                            ": " + err.what());
    }
    if (!std::isfinite(left) || !std::isfinite(right)) {
      throw InvalidArgument("plugin_process: estimator '" + est.name + "' returned a non-finite value at k = " +
                            std::to_string(k));
    }
    d[k] = static_cast<double>(k) * static_cast<double>(n - k) * scale * estimate_gap(left, right);
  }
  DetectorKind kind = DetectorKind::PluginMean;
  if (est.name == "median") kind = DetectorKind::PluginMedian;
  if (est.name == "variance") kind = DetectorKind::PluginVariance;
  return GlobalProcess(std::move(d), kind);
}

VectorProcess multivariate_plugin_process(const MultiSeries& x, const VectorWindowEstimator& est) {
  const std::size_t n = x.size();
  const std::size_t q = x.dim();
  if (n < 2) throw InvalidArgument("multivariate_plugin_process: series too short");
  if (!est.estimate) throw InvalidArgument("multivariate_plugin_process: estimator has no function");
  const std::size_t min_side = std::max<std::size_t>({est.block, est.min_size, 1});
  const double scale = std::pow(static_cast<double>(n), -1.5);
  std::vector<double> d((n + 1) * q, 0.0);
  for (std::size_t k = min_side; k + min_side <= n; ++k) {
    const auto left = est.estimate(x, 1, k);
    const auto right = est.estimate(x, k + 1, n);
    if (left.size() != q || right.size() != q) {
      throw InvalidArgument("multivariate_plugin_process: estimator returned dimension " +
                            std::to_string(left.size()) + ", expected " + std::to_string(q));
    }
    const double w = static_cast<double>(k) * static_cast<double>(n - k) * scale;
    for (std::size_t c = 0; c < q; ++c) d[k * q + c] = w * estimate_gap(left[c], right[c]);
  }
  return VectorProcess(n, q, std::move(d));
}

GlobalProcess make_process(DetectorKind kind, const Series& x) {
  switch (kind) {
    case DetectorKind::Cusum: return cusum_process(x);
    case DetectorKind::Wilcoxon: return wilcoxon_process(x);
    case DetectorKind::HodgesLehmann: return hodges_lehmann_process(x);
    case DetectorKind::PluginMean: return plugin_process(x, WindowEstimator::mean());
    case DetectorKind::PluginMedian: return plugin_process(x, WindowEstimator::median());
    case DetectorKind::PluginVariance: return plugin_process(x, WindowEstimator::variance());
    case DetectorKind::Multivariate: break;
  }
  throw InvalidArgument("make_process: multivariate detector needs a MultiSeries");
}

}  // namespace lsncp
