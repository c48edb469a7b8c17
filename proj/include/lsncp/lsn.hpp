#pragma once

// Localized, self-normalized statistics built on any global change detecting
// process D(0..n), their score curves, and aggregation into a test statistic.
//
// For a window (s, k, e):
//   L(k|s,e) = sqrt(n/(e-s+1)) [D(k) - D(s-1) - (k-s+1)/(e-s+1) (D(e) - D(s-1))]
//   V(k|s,e) = (k-s+1)/(e-s+1)^2 sum_{j=s..k}   L(j|s,k)^2
//            + (e-k)  /(e-s+1)^2 sum_{j=k+1..e} L(j|k+1,e)^2
//   T(k|s,e) = L^2 / V   (0 for invalid windows and degenerate V)
// and the score at k is the supremum of T over symmetric windows
// (k-d, k, k+1+d) with d >= floor(eps n).

#include <optional>
#include <span>
#include <vector>

#include "lsncp/core.hpp"
#include "lsncp/detectors.hpp"

namespace lsncp {

/// Windows whose self-normalizer falls below this fraction of the window's
/// magnitude scale n * mean(D^2) are treated as degenerate (V = 0).
inline constexpr double kDegenerateRelTol = 1e-13;

inline constexpr std::size_t kDirectSegmentLength = 16;

/// Direct evaluation of L(k|s,e). Throws InvalidArgument for invalid windows.
double localized_stat(const GlobalProcess& d, Window w);

/// Direct O(e-s) evaluation of V(k|s,e) from its definition.
double self_normalizer(const GlobalProcess& d, Window w);

/// T(k|s,e) by direct evaluation; total (0 for invalid windows or V = 0).
double lsn_stat(const GlobalProcess& d, Window w);

/// O(1) evaluation of L, V and T for arbitrary windows using the prefix sums
/// S_Y, S_YY and S_IY of the process. Segments of at most
/// kDirectSegmentLength points are summed directly, where prefix-sum
/// differences would lose relative precision. Holds a copy of the process.
class LsnKernel {
 public:
  explicit LsnKernel(const GlobalProcess& d);

  std::size_t n() const noexcept { return n_; }
  const PrefixSums& sums() const noexcept { return sums_; }

  double localized(Window w) const noexcept;
  double self_normalizer(Window w) const noexcept;
  /// Assumes a valid window; returns 0 for degenerate V.
  double stat(Window w) const noexcept;

  /// sum_{j=a..b} L(j|a,b)^2, the within-segment sum of squared bridges.
  double segment_bridge_energy(std::size_t a, std::size_t b) const noexcept;

 private:
  struct Energy {
    double value;
    double error;  // rounding bound of the prefix-sum evaluation
  };
  Energy segment(std::size_t a, std::size_t b) const noexcept;
  double magnitude_scale(Window w) const noexcept;

  std::size_t n_;
  std::vector<double> d_;
  PrefixSums sums_;
};

/// Optional weights w_d applied inside the supremum over window half-widths
/// (max_d w_d T(k|k-d,k+1+d)). Index d; missing entries default to 1.
struct SweepOptions {
  std::vector<double> d_weights;
};

struct SweepResult {
  double score = 0.0;
  std::size_t argmax_d = 0;
};

/// max over d in [floor(eps n), min(k-1, n-k-1)] of T(k|k-d, k+1+d), each
/// half-width costing O(1) through the kernel's prefix sums; O(n) per k.
SweepResult recursive_window_sweep(const LsnKernel& kernel, std::size_t k, double epsilon,
                                   const SweepOptions& options = {});
SweepResult recursive_window_sweep(const GlobalProcess& d, std::size_t k, double epsilon, const PrefixSums& sums);

/// Score function k -> T_n(k) over k = floor(eps n)+1 .. n-floor(eps n)-1.
struct ScoreCurve {
  double epsilon = 0.1;
  std::size_t n = 0;
  std::size_t trim = 0;  // floor(eps n)
  std::vector<double> scores;  // scores[i] is T_n(first_k() + i)
  std::vector<std::size_t> argmax_d;  // left half-width attaining the supremum
  std::vector<std::size_t> argmax_d_right;  // equals argmax_d for symmetric curves

  std::size_t first_k() const noexcept { return trim + 1; }
  std::size_t last_k() const noexcept { return n - trim - 1; }
  std::size_t size() const noexcept { return scores.size(); }
  double score(std::size_t k) const { return scores.at(k - first_k()); }
  /// Smallest k attaining the maximum score.
  std::size_t argmax_k() const;
};

/// Throws InvalidArgument unless 0 < eps < 1/2 and the trimmed range is non-empty.
void validate_epsilon(double epsilon, std::size_t n);

ScoreCurve score_curve(const GlobalProcess& d, double epsilon, const SweepOptions& options = {});
ScoreCurve score_curve(const LsnKernel& kernel, double epsilon, const SweepOptions& options = {});

/// Reference double loop evaluating lsn_stat directly for every (k, d); O(n^3).
ScoreCurve score_curve_brute(const GlobalProcess& d, double epsilon);

/// Supremum over independent half-widths d0, d1 >= floor(eps n); O(n^2) per k.
ScoreCurve score_curve_nonsymmetric(const GlobalProcess& d, double epsilon);

/// Aggregation over k of the score curve.
struct Aggregator {
  enum class Kind { Max, Mean, WeightedMax, WeightedMean, Median, TrimmedMean };
  Kind kind = Kind::Mean;
  std::vector<double> weights;  // per trimmed-range index, weighted kinds only
  double trim_fraction = 0.1;  // TrimmedMean only, in [0, 0.5)

  static Aggregator max() { return {Kind::Max, {}, 0.0}; }
  static Aggregator mean() { return {Kind::Mean, {}, 0.0}; }
  static Aggregator median() { return {Kind::Median, {}, 0.0}; }
  static Aggregator trimmed_mean(double fraction) { return {Kind::TrimmedMean, {}, fraction}; }
  static Aggregator weighted_mean(std::vector<double> w) { return {Kind::WeightedMean, std::move(w), 0.0}; }
  static Aggregator weighted_max(std::vector<double> w) { return {Kind::WeightedMax, std::move(w), 0.0}; }
};

/// Aggregates the curve; the default (mean) gives the proposed statistic.
double test_statistic(const ScoreCurve& curve, const Aggregator& agg = Aggregator::mean());

/// Convenience: D from the series, then the mean-aggregated symmetric score.
double lsn_test_statistic(const Series& x, DetectorKind kind, double epsilon);

// Multivariate quadratic form L^T V^{-1} L.

struct MultiLsnResult {
  double value = 0.0;
  bool singular = false;
};

/// Condition-number threshold beyond which V is treated as singular.
inline constexpr double kSingularConditionLimit = 1e12;

/// Direct evaluation with outer-product accumulation of V.
MultiLsnResult lsn_stat_multi(const VectorProcess& d, Window w);

/// O(q^2) per window via vector/matrix prefix sums.
class MultiLsnKernel {
 public:
  explicit MultiLsnKernel(const VectorProcess& d);
  MultiLsnResult stat(Window w) const;
  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::size_t q_;
  std::vector<double> d_;    // (n+1) x q
  std::vector<double> s_;    // prefix sums of D, (n+1) x q
  std::vector<double> si_;   // prefix sums of j D(j), (n+1) x q
  std::vector<double> sdd_;  // prefix sums of D D^T, (n+1) x q x q
};

/// Symmetric-window score curve of the multivariate statistic.
ScoreCurve score_curve_multi(const VectorProcess& d, double epsilon);

}  // namespace lsncp
