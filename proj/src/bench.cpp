#include "lsncp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lsncp/core.hpp"
#include "lsncp/detectors.hpp"
#include "lsncp/lsn.hpp"

namespace lsncp {

namespace {

template <class F>
double time_once(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.repeats == 0) throw InvalidArgument("bench needs at least one repeat");
  std::vector<BenchRow> rows;
  for (std::size_t n : options.sizes) {
    validate_epsilon(options.epsilon, n);
    CounterRng rng(options.seed, n);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    const GlobalProcess d = cusum_process(Series(std::move(v)));

    BenchRow row;
    row.n = n;
    ScoreCurve fast;
    std::vector<double> times;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      times.push_back(time_once([&] { fast = score_curve(d, options.epsilon); }));
    }
    row.recursive_seconds = median_of(times);

    if (n > options.brute_limit) {
      row.brute_seconds = std::numeric_limits<double>::quiet_NaN();
    } else {
      const std::size_t reps = n > options.brute_repeat_limit ? 1 : options.repeats;
      ScoreCurve slow;
      times.clear();
      for (std::size_t r = 0; r < reps; ++r) {
        times.push_back(time_once([&] { slow = score_curve_brute(d, options.epsilon); }));
      }
      row.brute_seconds = median_of(times);
      for (std::size_t i = 0; i < fast.size(); ++i) {
        const double scale = std::max(1.0, std::abs(slow.scores[i]));
        if (std::abs(fast.scores[i] - slow.scores[i]) > 1e-9 * scale) row.curves_match = false;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<std::size_t>& ns, const std::vector<double>& seconds) {
  if (ns.size() != seconds.size() || ns.size() < 2) throw InvalidArgument("slope needs at least two points");
  double mx = 0.0, my = 0.0;
  const double m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += std::log(static_cast<double>(ns[i])) / m;
    my += std::log(seconds[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dx = std::log(static_cast<double>(ns[i])) - mx;
    sxy += dx * (std::log(seconds[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace lsncp
