#pragma once

// Global one-change detecting processes D(0..n).

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsncp/core.hpp"

namespace lsncp {

enum class DetectorKind { Cusum, Wilcoxon, HodgesLehmann, PluginMean, PluginMedian, PluginVariance, Multivariate };

std::string_view to_string(DetectorKind kind);
/// Accepts the CLI spellings: cusum, wilcoxon, hl, plugin:mean, plugin:median, plugin:var.
DetectorKind parse_detector(std::string_view name);

/// Scalar process D(0..n) with D(0) = 0; values()[k] is D(k).
class GlobalProcess {
 public:
  GlobalProcess(std::vector<double> values, DetectorKind kind);

  std::size_t n() const noexcept { return values_.size() - 1; }
  double operator()(std::size_t k) const noexcept { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }
  DetectorKind kind() const noexcept { return kind_; }

 private:
  std::vector<double> values_;
  DetectorKind kind_;
};

/// q-dimensional process; row k (k = 0..n) holds D(k).
class VectorProcess {
 public:
  VectorProcess(std::size_t n, std::size_t q, std::vector<double> row_major);

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return q_; }
  std::span<const double> operator()(std::size_t k) const {
    return std::span<const double>(data_).subspan(k * q_, q_);
  }
  double at(std::size_t k, std::size_t c) const noexcept { return data_[k * q_ + c]; }
  /// Component c as a scalar process.
  GlobalProcess component(std::size_t c) const;

 private:
  std::size_t n_;
  std::size_t q_;
  std::vector<double> data_;
};

/// Estimator theta_hat(s, e) evaluated on observations s..e (1-based,
/// inclusive). `block` is the length h of the joint-distribution functional;
/// the estimator is only evaluated on subsamples of at least
/// max(block, min_size) observations.
struct WindowEstimator {
  std::function<double(const Series&, std::size_t, std::size_t)> estimate;
  std::size_t block = 1;
  std::size_t min_size = 1;
  std::string name;

  static WindowEstimator mean();
  static WindowEstimator median();
  /// Sample variance with divisor (e - s + 1); needs two observations.
  static WindowEstimator variance();
};

/// Vector-valued counterpart used by the multivariate plug-in process.
struct VectorWindowEstimator {
  std::function<std::vector<double>(const MultiSeries&, std::size_t, std::size_t)> estimate;
  std::size_t block = 1;
  std::size_t min_size = 1;

  /// Column-wise subsample means.
  static VectorWindowEstimator mean();
};

/// D(k) = n^{-1/2} sum_{i<=k} (x_i - xbar).
GlobalProcess cusum_process(const Series& x);

/// D(k) = n^{-3/2} (sum_{i<=k} R_i - (k/n) sum_i R_i) with midranks for ties.
GlobalProcess wilcoxon_process(const Series& x);

/// D(k) = n^{-3/2} k (n-k) median{x_i - x_j : i <= k < j}, D(0) = D(n) = 0.
/// Uses enumeration for n <= kHodgesLehmannEnumerationLimit and the
/// sorted-matrix selection otherwise; both give identical values.
GlobalProcess hodges_lehmann_process(const Series& x);
inline constexpr std::size_t kHodgesLehmannEnumerationLimit = 200;

/// Enumerate-and-select path: O(n^3) overall.
GlobalProcess hodges_lehmann_process_naive(const Series& x);
/// Selection in the implicit sorted matrix of cross differences: O(n^2 log n).
GlobalProcess hodges_lehmann_process_fast(const Series& x);

/// D(k) = k (n-k) n^{-3/2} (theta_hat(1,k) - theta_hat(k+1,n)) on the
/// feasibility band, 0 outside it.
GlobalProcess plugin_process(const Series& x, const WindowEstimator& est);

VectorProcess multivariate_plugin_process(const MultiSeries& x, const VectorWindowEstimator& est);

/// Dispatch on a scalar detector kind.
GlobalProcess make_process(DetectorKind kind, const Series& x);

/// Median of a non-empty range (mean of the two central order statistics for
/// even sizes). Reorders the input.
double median_inplace(std::vector<double>& v);

}  // namespace lsncp
