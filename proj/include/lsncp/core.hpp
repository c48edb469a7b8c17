#pragma once

// Shared numeric types for the lsncp library.
//
// Index convention: the API talks about observations x_1..x_n and process
// values D(0..n) with 1-based indices. Storage is a plain 0-based vector;
// for processes and prefix sums slot i holds index i (slot 0 is D(0) = 0),
// for a Series slot i holds x_{i+1}.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsncp {

/// Raised for malformed arguments or infeasible parameter combinations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input (configs, tables); a refinement of InvalidArgument.
class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Raised when a statistic is undefined on the supplied data
/// (constant differences, singular variance, ...).
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered, finite, univariate observations x_1..x_n.
class Series {
 public:
  Series() = default;
  explicit Series(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  /// 1-based access: at(1) is the first observation.
  double at(std::size_t i) const { return values_.at(i - 1); }
  double operator[](std::size_t i0) const noexcept { return values_[i0]; }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  /// Observations s..e (1-based, inclusive) as a new series.
  Series slice(std::size_t s, std::size_t e) const;

 private:
  std::vector<double> values_;
};

/// n x q matrix of observations stored row-major (one row per time index).
class MultiSeries {
 public:
  MultiSeries() = default;
  MultiSeries(std::size_t n, std::size_t q, std::vector<double> row_major);
  static MultiSeries from_columns(const std::vector<std::vector<double>>& columns);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return q_; }
  /// Row for time index t (1-based).
  std::span<const double> row(std::size_t t) const;
  Series column(std::size_t c) const;

 private:
  std::size_t n_ = 0;
  std::size_t q_ = 0;
  std::vector<double> data_;
};

/// Candidate split k inside the local subsample x_s..x_e (1-based).
struct Window {
  std::size_t s = 0;
  std::size_t k = 0;
  std::size_t e = 0;

  /// Symmetric window (k-d, k, k+1+d); caller must ensure d < k.
  static Window symmetric(std::size_t k, std::size_t d) { return {k - d, k, k + 1 + d}; }

  std::size_t length() const noexcept { return e - s + 1; }
  /// 1 <= s <= k < e <= n.
  bool valid(std::size_t n) const noexcept { return s >= 1 && s <= k && k < e && e <= n; }
};

/// Prefix sums of a process Y(0..n): S_Y, S_YY and S_IY, each with value 0 at
/// index 0. Range sums over (a, b] are O(1).
class PrefixSums {
 public:
  PrefixSums() = default;
  explicit PrefixSums(std::span<const double> process);

  std::size_t n() const noexcept { return sy_.empty() ? 0 : sy_.size() - 1; }
  const std::vector<double>& sum() const noexcept { return sy_; }
  const std::vector<double>& sum_sq() const noexcept { return syy_; }
  const std::vector<double>& sum_index() const noexcept { return siy_; }

  /// Sum of Y(i) for i in [a, b] (1-based, inclusive; empty if a > b).
  double range_sum(std::size_t a, std::size_t b) const noexcept { return a > b ? 0.0 : sy_[b] - sy_[a - 1]; }
  double range_sum_sq(std::size_t a, std::size_t b) const noexcept { return a > b ? 0.0 : syy_[b] - syy_[a - 1]; }
  double range_sum_index(std::size_t a, std::size_t b) const noexcept {
    return a > b ? 0.0 : siy_[b] - siy_[a - 1];
  }

 private:
  std::vector<double> sy_;
  std::vector<double> syy_;
  std::vector<double> siy_;
};

/// Identifies one independent random stream: replication `stream` of a run
/// seeded with `seed`.
struct SeedSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Counter-based generator: output i of stream (seed, stream) is a bijective
/// 64-bit mix of key + i * gamma, where the key is a hash of the SeedSpec.
/// Draw r of a stream never depends on any other stream, so replications can
/// run in any order on any number of threads.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(SeedSpec spec) noexcept;
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : CounterRng(SeedSpec{seed, stream}) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on (0, 1), never exactly 0 or 1.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; draws are consumed in pairs.
  double normal() noexcept;
  /// Student-t with `df` degrees of freedom (normal over sqrt(chi2/df)).
  double student_t(double df);

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Worker count used by parallel_for. Reads LSNCP_THREADS, falls back to the
/// hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count). Each index is executed exactly once;
/// results must be written to per-index slots so the outcome does not depend
/// on the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

/// floor(eps * n) computed without the binary rounding surprises of
/// e.g. 0.1 * 300 = 30.000000000000004.
std::size_t trim_count(double epsilon, std::size_t n);

/// Empirical quantile by inverse ECDF on an ascending sample:
/// smallest x with F_n(x) >= p.
double empirical_quantile(std::span<const double> sorted, double p);

double mean(std::span<const double> x);

}  // namespace lsncp
