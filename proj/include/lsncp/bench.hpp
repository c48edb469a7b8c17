#pragma once

// Wall-clock comparison of the recursive score-curve sweep with the direct
// double loop.

#include <cstdint>
#include <vector>

namespace lsncp {

struct BenchRow {
  std::size_t n = 0;
  double recursive_seconds = 0.0;  // median over repeats
  double brute_seconds = 0.0;      // median over repeats; NaN when skipped
  bool curves_match = true;        // max relative difference below 1e-9
  double speedup() const { return brute_seconds / recursive_seconds; }
};

struct BenchOptions {
  std::vector<std::size_t> sizes{500, 1000, 2000, 4000};
  std::size_t repeats = 3;
  /// Sizes above this get a single brute-force run.
  std::size_t brute_repeat_limit = 2000;
  /// Sizes above this skip the brute-force run entirely.
  std::size_t brute_limit = 4000;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
};

std::vector<BenchRow> run_bench(const BenchOptions& options = {});

/// Least-squares slope of log(seconds) on log(n).
double loglog_slope(const std::vector<std::size_t>& ns, const std::vector<double>& seconds);

}  // namespace lsncp
