#include "lsncp/lsn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace lsncp {

namespace {

void require_valid(Window w, std::size_t n) {
  if (!w.valid(n)) {
    throw InvalidArgument("invalid window (s=" + std::to_string(w.s) + ", k=" + std::to_string(w.k) +
                          ", e=" + std::to_string(w.e) + ") for n=" + std::to_string(n));
  }
}

// L(j|a,b) evaluated straight from the process values.
double bridge(std::span<const double> d, double n, std::size_t j, std::size_t a, std::size_t b) {
  const double len = static_cast<double>(b - a + 1);
  const double base = d[a - 1];
  const double frac = static_cast<double>(j - a + 1) / len;
  return std::sqrt(n / len) * (d[j] - base - frac * (d[b] - base));
}

double direct_scale(std::span<const double> d, double n, Window w) {
  double acc = 0.0;
  for (std::size_t j = w.s - 1; j <= w.e; ++j) acc += d[j] * d[j];
  return n * acc / static_cast<double>(w.length() + 1);
}

}  // namespace

double localized_stat(const GlobalProcess& d, Window w) {
  require_valid(w, d.n());
  return bridge(d.values(), static_cast<double>(d.n()), w.k, w.s, w.e);
}

double self_normalizer(const GlobalProcess& d, Window w) {
  require_valid(w, d.n());
  const auto v = d.values();
  const double n = static_cast<double>(d.n());
  const double width = static_cast<double>(w.length());
  double left = 0.0;
  for (std::size_t j = w.s; j <= w.k; ++j) {
    const double l = bridge(v, n, j, w.s, w.k);
    left += l * l;
  }
  double right = 0.0;
  for (std::size_t j = w.k + 1; j <= w.e; ++j) {
    const double l = bridge(v, n, j, w.k + 1, w.e);
    right += l * l;
  }
  return (static_cast<double>(w.k - w.s + 1) * left + static_cast<double>(w.e - w.k) * right) / (width * width);
}

double lsn_stat(const GlobalProcess& d, Window w) {
  if (!w.valid(d.n())) return 0.0;
  const double v = self_normalizer(d, w);
  if (!(v > kDegenerateRelTol * direct_scale(d.values(), static_cast<double>(d.n()), w))) return 0.0;
  const double l = localized_stat(d, w);
  return l * l / v;
}

LsnKernel::LsnKernel(const GlobalProcess& d)
    : n_(d.n()), d_(d.values().begin(), d.values().end()), sums_(d.values()) {}

double LsnKernel::localized(Window w) const noexcept {
  const double len = static_cast<double>(w.length());
  const double base = d_[w.s - 1];
  const double frac = static_cast<double>(w.k - w.s + 1) / len;
  return std::sqrt(static_cast<double>(n_) / len) * (d_[w.k] - base - frac * (d_[w.e] - base));
}

LsnKernel::Energy LsnKernel::segment(std::size_t a, std::size_t b) const noexcept {
  const double len = static_cast<double>(b - a + 1);
  const double base = d_[a - 1];
  const double delta = d_[b] - base;
  const double nl = static_cast<double>(n_) / len;
  if (b - a + 1 <= kDirectSegmentLength) {
    double acc = 0.0;
    for (std::size_t j = a; j <= b; ++j) {
      const double u = d_[j] - base - static_cast<double>(j - a + 1) / len * delta;
      acc += u * u;
    }
    return {nl * acc, 0.0};
  }
  const auto& sy = sums_.sum();
  const auto& syy = sums_.sum_sq();
  const auto& siy = sums_.sum_index();
  const double r_sy = sy[b] - sy[a - 1];
  const double r_syy = syy[b] - syy[a - 1];
  const double r_siy = siy[b] - siy[a - 1];
  const double shift = static_cast<double>(a - 1);
  const double tri = len * (len + 1.0) / 2.0;
  const double sum_uu = r_syy - 2.0 * base * r_sy + len * base * base;
  const double sum_tu = (r_siy - shift * r_sy - base * tri) / len;
  const double sum_tt = (len + 1.0) * (2.0 * len + 1.0) / (6.0 * len);
  const double q = sum_uu - 2.0 * delta * sum_tu + delta * delta * sum_tt;
  // Magnitudes of the cancelling terms bound the rounding error of q.
  const double abs_sy = std::abs(sy[b]) + std::abs(sy[a - 1]);
  const double mag = syy[b] + syy[a - 1] + 2.0 * std::abs(base) * abs_sy + len * base * base +
                     2.0 * std::abs(delta) *
                         (std::abs(siy[b]) + std::abs(siy[a - 1]) + shift * abs_sy + std::abs(base) * tri) / len +
                     delta * delta * sum_tt;
  constexpr double kRoundoff = 16.0 * std::numeric_limits<double>::epsilon();
  return {nl * std::max(q, 0.0), nl * kRoundoff * mag};
}

double LsnKernel::segment_bridge_energy(std::size_t a, std::size_t b) const noexcept { return segment(a, b).value; }

double LsnKernel::self_normalizer(Window w) const noexcept {
  const double width = static_cast<double>(w.length());
  const double left = segment_bridge_energy(w.s, w.k);
  const double right = segment_bridge_energy(w.k + 1, w.e);
  return (static_cast<double>(w.k - w.s + 1) * left + static_cast<double>(w.e - w.k) * right) / (width * width);
}

double LsnKernel::magnitude_scale(Window w) const noexcept {
  const double base = d_[w.s - 1];
  return static_cast<double>(n_) * (sums_.range_sum_sq(w.s, w.e) + base * base) /
         static_cast<double>(w.length() + 1);
}

double LsnKernel::stat(Window w) const noexcept {
  const double width = static_cast<double>(w.length());
  const double wl = static_cast<double>(w.k - w.s + 1);
  const double wr = static_cast<double>(w.e - w.k);
  const Energy left = segment(w.s, w.k);
  const Energy right = segment(w.k + 1, w.e);
  const double v = (wl * left.value + wr * right.value) / (width * width);
  const double err = (wl * left.error + wr * right.error) / (width * width);
  if (!(v > std::max(kDegenerateRelTol * magnitude_scale(w), err))) return 0.0;
  const double l = localized(w);
  return l * l / v;
}

SweepResult recursive_window_sweep(const LsnKernel& kernel, std::size_t k, double epsilon,
                                   const SweepOptions& options) {
  const std::size_t n = kernel.n();
  const std::size_t h = trim_count(epsilon, n);
  SweepResult out;
  if (k < 1 || k + 1 > n) return out;
  const std::size_t d_max = std::min(k - 1, n - k - 1);
  double best = -1.0;
  for (std::size_t d = h; d <= d_max; ++d) {
    double t = kernel.stat(Window::symmetric(k, d));
    if (d < options.d_weights.size()) t *= options.d_weights[d];
    if (t > best) {
      best = t;
      out.argmax_d = d;
    }
  }
  out.score = std::max(best, 0.0);
  return out;
}

SweepResult recursive_window_sweep(const GlobalProcess& d, std::size_t k, double epsilon, const PrefixSums& sums) {
  if (sums.n() != d.n()) throw InvalidArgument("prefix sums do not belong to this process");
  return recursive_window_sweep(LsnKernel(d), k, epsilon);
}

std::size_t ScoreCurve::argmax_k() const {
  if (scores.empty()) throw InvalidArgument("empty score curve");
  const auto it = std::max_element(scores.begin(), scores.end());
  return first_k() + static_cast<std::size_t>(it - scores.begin());
}

void validate_epsilon(double epsilon, std::size_t n) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 1/2)");
  const std::size_t h = trim_count(epsilon, n);
  if (n < 2 * h + 2) {
    throw InvalidArgument("series of length " + std::to_string(n) + " is too short for epsilon " +
                          std::to_string(epsilon));
  }
}

namespace {

ScoreCurve empty_curve(double epsilon, std::size_t n) {
  validate_epsilon(epsilon, n);
  ScoreCurve c;
  c.epsilon = epsilon;
  c.n = n;
  c.trim = trim_count(epsilon, n);
  const std::size_t m = n - 2 * c.trim - 1;
  c.scores.assign(m, 0.0);
  c.argmax_d.assign(m, 0);
  c.argmax_d_right.assign(m, 0);
  return c;
}

template <class F>
void for_each_k_parallel(ScoreCurve& c, F&& per_k) {
  const std::size_t m = c.size();
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (m + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t hi = std::min(m, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < hi; ++i) per_k(i, c.first_k() + i);
  });
}

}  // namespace

ScoreCurve score_curve(const LsnKernel& kernel, double epsilon, const SweepOptions& options) {
  ScoreCurve c = empty_curve(epsilon, kernel.n());
  for_each_k_parallel(c, [&](std::size_t i, std::size_t k) {
    const SweepResult r = recursive_window_sweep(kernel, k, epsilon, options);
    c.scores[i] = r.score;
    c.argmax_d[i] = r.argmax_d;
    c.argmax_d_right[i] = r.argmax_d;
  });
  return c;
}

ScoreCurve score_curve(const GlobalProcess& d, double epsilon, const SweepOptions& options) {
  validate_epsilon(epsilon, d.n());
  return score_curve(LsnKernel(d), epsilon, options);
}

ScoreCurve score_curve_brute(const GlobalProcess& d, double epsilon) {
  ScoreCurve c = empty_curve(epsilon, d.n());
  const std::size_t n = d.n();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::size_t k = c.first_k() + i;
    double best = -1.0;
    for (std::size_t dd = c.trim; dd <= n; ++dd) {
      const Window w{k > dd ? k - dd : 0, k, k + 1 + dd};
      const double t = lsn_stat(d, w);
      if (t > best) {
        best = t;
        c.argmax_d[i] = dd;
      }
    }
    c.scores[i] = best;
    c.argmax_d_right[i] = c.argmax_d[i];
  }
  return c;
}

ScoreCurve score_curve_nonsymmetric(const GlobalProcess& d, double epsilon) {
  ScoreCurve c = empty_curve(epsilon, d.n());
  const LsnKernel kernel(d);
  const std::size_t n = d.n();
  for_each_k_parallel(c, [&](std::size_t i, std::size_t k) {
    double best = -1.0;
    for (std::size_t d0 = c.trim; d0 + 1 <= k; ++d0) {
      for (std::size_t d1 = c.trim; k + 1 + d1 <= n; ++d1) {
        const double t = kernel.stat({k - d0, k, k + 1 + d1});
        if (t > best) {
          best = t;
          c.argmax_d[i] = d0;
          c.argmax_d_right[i] = d1;
        }
      }
    }
    c.scores[i] = std::max(best, 0.0);
  });
  return c;
}

double test_statistic(const ScoreCurve& curve, const Aggregator& agg) {
  const auto& s = curve.scores;
  if (s.empty()) throw InvalidArgument("cannot aggregate an empty score curve");
  const auto check_weights = [&] {
    if (agg.weights.size() != s.size()) {
      throw InvalidArgument("aggregator needs " + std::to_string(s.size()) + " weights, got " +
                            std::to_string(agg.weights.size()));
    }
    for (double w : agg.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("aggregator weights must be finite and nonnegative");
    }
  };
  switch (agg.kind) {
    case Aggregator::Kind::Max:
      return *std::max_element(s.begin(), s.end());
    case Aggregator::Kind::Mean:
      return mean(s);
    case Aggregator::Kind::WeightedMax: {
      check_weights();
      double best = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) best = std::max(best, agg.weights[i] * s[i]);
      return best;
    }
    case Aggregator::Kind::WeightedMean: {
      check_weights();
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        num += agg.weights[i] * s[i];
        den += agg.weights[i];
      }
      if (!(den > 0.0)) throw InvalidArgument("weighted mean needs weights with positive sum");
      return num / den;
    }
    case Aggregator::Kind::Median: {
      std::vector<double> tmp = s;
      return median_inplace(tmp);
    }
    case Aggregator::Kind::TrimmedMean: {
      if (!(agg.trim_fraction >= 0.0 && agg.trim_fraction < 0.5)) {
        throw InvalidArgument("trimmed-mean fraction must lie in [0, 0.5)");
      }
      std::vector<double> tmp = s;
      std::sort(tmp.begin(), tmp.end());
      const auto cut = static_cast<std::size_t>(std::floor(agg.trim_fraction * static_cast<double>(tmp.size())));
      const std::size_t keep = tmp.size() - 2 * cut;
      if (keep == 0) return mean(tmp);
      return mean(std::span<const double>(tmp).subspan(cut, keep));
    }
  }
  throw InvalidArgument("unknown aggregator");
}

double lsn_test_statistic(const Series& x, DetectorKind kind, double epsilon) {
  return test_statistic(score_curve(make_process(kind, x), epsilon));
}

// Multivariate.

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

MultiLsnResult quadratic_form(const Vec& l, const Mat& v, double scale) {
  MultiLsnResult out;
  Eigen::SelfAdjointEigenSolver<Mat> eig(v);
  if (eig.info() != Eigen::Success) {
    out.singular = true;
    return out;
  }
  const Vec& lam = eig.eigenvalues();
  const double hi = lam.maxCoeff();
  const double lo = lam.minCoeff();
  if (!(hi > kDegenerateRelTol * scale) || !(lo > 0.0) || hi / lo > kSingularConditionLimit) {
    out.singular = true;
    return out;
  }
  const Vec z = eig.eigenvectors().transpose() * l;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) acc += z[i] * z[i] / lam[i];
  out.value = acc;
  return out;
}

Vec row_vec(const VectorProcess& d, std::size_t k) {
  const auto r = d(k);
  return Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(r.size()));
}

Vec bridge_multi(const VectorProcess& d, double n, std::size_t j, std::size_t a, std::size_t b) {
  const double len = static_cast<double>(b - a + 1);
  const Vec base = row_vec(d, a - 1);
  const double frac = static_cast<double>(j - a + 1) / len;
  return std::sqrt(n / len) * (row_vec(d, j) - base - frac * (row_vec(d, b) - base));
}

}  // namespace

MultiLsnResult lsn_stat_multi(const VectorProcess& d, Window w) {
  if (!w.valid(d.n())) return {};
  const double n = static_cast<double>(d.n());
  const auto q = static_cast<Eigen::Index>(d.dim());
  const double width = static_cast<double>(w.length());
  Mat left = Mat::Zero(q, q);
  for (std::size_t j = w.s; j <= w.k; ++j) {
    const Vec l = bridge_multi(d, n, j, w.s, w.k);
    left += l * l.transpose();
  }
  Mat right = Mat::Zero(q, q);
  for (std::size_t j = w.k + 1; j <= w.e; ++j) {
    const Vec l = bridge_multi(d, n, j, w.k + 1, w.e);
    right += l * l.transpose();
  }
  const Mat v = (static_cast<double>(w.k - w.s + 1) * left + static_cast<double>(w.e - w.k) * right) / (width * width);
  double scale = 0.0;
  for (std::size_t j = w.s - 1; j <= w.e; ++j) scale += row_vec(d, j).squaredNorm();
  scale *= n / (width + 1.0);
  return quadratic_form(bridge_multi(d, n, w.k, w.s, w.e), v, scale);
}

MultiLsnKernel::MultiLsnKernel(const VectorProcess& d)
    : n_(d.n()),
      q_(d.dim()),
      d_((n_ + 1) * q_),
      s_((n_ + 1) * q_, 0.0),
      si_((n_ + 1) * q_, 0.0),
      sdd_((n_ + 1) * q_ * q_, 0.0) {
  for (std::size_t c = 0; c < q_; ++c) d_[c] = d.at(0, c);
  for (std::size_t j = 1; j <= n_; ++j) {
    for (std::size_t c = 0; c < q_; ++c) {
      const double y = d.at(j, c);
      d_[j * q_ + c] = y;
      s_[j * q_ + c] = s_[(j - 1) * q_ + c] + y;
      si_[j * q_ + c] = si_[(j - 1) * q_ + c] + static_cast<double>(j) * y;
      for (std::size_t r = 0; r < q_; ++r) {
        const std::size_t idx = (j * q_ + c) * q_ + r;
        sdd_[idx] = sdd_[idx - q_ * q_] + y * d.at(j, r);
      }
    }
  }
}

MultiLsnResult MultiLsnKernel::stat(Window w) const {
  if (!w.valid(n_)) return {};
  const auto q = static_cast<Eigen::Index>(q_);
  const double n = static_cast<double>(n_);
  auto row = [&](const std::vector<double>& src, std::size_t j) {
    return Eigen::Map<const Vec>(src.data() + j * q_, q);
  };
  auto mat = [&](std::size_t j) { return Eigen::Map<const Mat>(sdd_.data() + j * q_ * q_, q, q); };

  auto energy = [&](std::size_t a, std::size_t b) -> Mat {
    const double len = static_cast<double>(b - a + 1);
    const Vec base = row(d_, a - 1);
    const Vec delta = row(d_, b) - base;
    const Vec sy = row(s_, b) - row(s_, a - 1);
    const Vec siy = row(si_, b) - row(si_, a - 1);
    const Mat syy = mat(b) - mat(a - 1);
    const Mat suu = syy - base * sy.transpose() - sy * base.transpose() + len * base * base.transpose();
    const Vec stu = (siy - static_cast<double>(a - 1) * sy - base * (len * (len + 1.0) / 2.0)) / len;
    const double stt = (len + 1.0) * (2.0 * len + 1.0) / (6.0 * len);
    const Mat qm = suu - stu * delta.transpose() - delta * stu.transpose() + stt * delta * delta.transpose();
    return (n / len) * qm;
  };

  const double width = static_cast<double>(w.length());
  const Mat v = (static_cast<double>(w.k - w.s + 1) * energy(w.s, w.k) +
                 static_cast<double>(w.e - w.k) * energy(w.k + 1, w.e)) /
                (width * width);
  const Vec base = row(d_, w.s - 1);
  const double frac = static_cast<double>(w.k - w.s + 1) / width;
  const Vec l = std::sqrt(n / width) * (row(d_, w.k) - base - frac * (row(d_, w.e) - base));
  const Mat tr = mat(w.e) - mat(w.s - 1);
  const double scale = n * (tr.trace() + base.squaredNorm()) / (width + 1.0);
  return quadratic_form(l, v, scale);
}

ScoreCurve score_curve_multi(const VectorProcess& d, double epsilon) {
  ScoreCurve c = empty_curve(epsilon, d.n());
  const MultiLsnKernel kernel(d);
  const std::size_t n = d.n();
  for_each_k_parallel(c, [&](std::size_t i, std::size_t k) {
    double best = -1.0;
    const std::size_t d_max = std::min(k - 1, n - k - 1);
    for (std::size_t dd = c.trim; dd <= d_max; ++dd) {
      const double t = kernel.stat(Window::symmetric(k, dd)).value;
      if (t > best) {
        best = t;
        c.argmax_d[i] = dd;
      }
    }
    c.scores[i] = std::max(best, 0.0);
    c.argmax_d_right[i] = c.argmax_d[i];
  });
  return c;
}

}  // namespace lsncp
