#pragma once

// Change-point location estimation from LSN score curves.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lsncp/core.hpp"
#include "lsncp/critval.hpp"
#include "lsncp/detectors.hpp"
#include "lsncp/lsn.hpp"

namespace lsncp {

/// Estimated change points: strictly increasing indices in [1, n-1]. A change
/// at k means x_k and x_{k+1} belong to different segments.
struct ChangePointSet {
  std::vector<std::size_t> points;
  std::vector<double> scores;    // parallel to points
  std::vector<double> p_values;  // binary segmentation only, parallel to points
  std::string method;
  double threshold = 0.0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Model-selection criterion evaluated on a candidate set of change points.
struct Criterion {
  enum class Kind { LeastSquaresBic, User };
  Kind kind = Kind::LeastSquaresBic;
  double penalty = 1.0;
  std::function<double(const Series&, std::span<const std::size_t>)> user;

  double evaluate(const Series& x, std::span<const std::size_t> sorted_points) const;
};

/// Residual sum of squares of the piecewise-constant least-squares fit.
double segment_rss(const Series& x, std::span<const std::size_t> sorted_points);

/// k is kept iff T(k) > threshold, T(k) >= T(j) on (k-h, k+h] and T(j) < T(k)
/// for j in (k-h, k), with h = floor(eps n). The last condition keeps only the
/// leftmost index of a plateau.
ChangePointSet local_max_cps(const ScoreCurve& curve, double threshold);

/// Threshold c_alpha(n, rho_hat) from the embedded table.
double default_local_max_threshold(const Series& x, double alpha = 0.05);

/// Ranks candidates by descending score and keeps the top-j prefix minimizing
/// the criterion over j = 1..m.
ChangePointSet sara_select(const ChangePointSet& initial, const Series& x, const Criterion& crit = {});

/// Thread-safe cache of null distributions keyed by (rounded length, rounded rho).
class NullCache {
 public:
  NullCache(std::size_t reps, std::uint64_t seed) : reps_(reps), seed_(seed) {}

  /// Length rounded to the nearest 10 (at least 10) and rho to one decimal.
  std::shared_ptr<const NullDistribution> get(std::size_t length, double rho, double epsilon, DetectorKind kind);
  std::size_t size() const;

 private:
  std::size_t reps_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  std::map<std::tuple<std::size_t, long, long, int>, std::shared_ptr<const NullDistribution>> cache_;
};

struct BinsegOptions {
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  /// Shared cache; a private one is created when null.
  NullCache* cache = nullptr;
};

/// Tests each segment with its own score curve (segment-local trimming) and
/// splits at the curve's argmax when the segment p-value is below p0.
ChangePointSet binary_segmentation(const Series& x, double p0, double epsilon, DetectorKind kind,
                                   const BinsegOptions& options = {});

}  // namespace lsncp
