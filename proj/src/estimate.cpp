#include "lsncp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsncp {

double segment_rss(const Series& x, std::span<const std::size_t> sorted_points) {
  const std::size_t n = x.size();
  double rss = 0.0;
  std::size_t start = 1;
  auto add_segment = [&](std::size_t a, std::size_t b) {
    if (a > b) return;
    double m = 0.0;
    for (std::size_t i = a; i <= b; ++i) m += x.at(i);
    m /= static_cast<double>(b - a + 1);
    for (std::size_t i = a; i <= b; ++i) {
      const double r = x.at(i) - m;
      rss += r * r;
    }
  };
  for (std::size_t k : sorted_points) {
    if (k < start || k >= n) throw InvalidArgument("change points must be increasing and inside [1, n-1]");
    add_segment(start, k);
    start = k + 1;
  }
  add_segment(start, n);
  return rss;
}

double Criterion::evaluate(const Series& x, std::span<const std::size_t> sorted_points) const {
  if (kind == Kind::User) {
    if (!user) throw InvalidArgument("user criterion has no function");
    return user(x, sorted_points);
  }
  if (!(penalty >= 0.0)) throw InvalidArgument("criterion penalty must be nonnegative");
  const double n = static_cast<double>(x.size());
  double tss = segment_rss(x, {});
  const double floor = std::max(tss, 1.0) * 1e-300;
  const double rss = std::max(segment_rss(x, sorted_points), floor);
  return 0.5 * n * std::log(rss / n) + penalty * static_cast<double>(sorted_points.size()) * std::log(n);
}

ChangePointSet local_max_cps(const ScoreCurve& curve, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  ChangePointSet out;
  out.method = "localmax";
  out.threshold = threshold;
  const std::size_t h = std::max<std::size_t>(curve.trim, 1);
  const auto& t = curve.scores;
  const std::size_t m = t.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!(t[i] > threshold)) continue;
    const std::size_t lo = i + 1 >= h ? i + 1 - h : 0;  // first index of (i-h, i+h]
    const std::size_t hi = std::min(m - 1, i + h);
    bool keep = true;
    for (std::size_t j = lo; j <= hi && keep; ++j) {
      if (t[j] > t[i] || (j < i && t[j] == t[i])) keep = false;
    }
    if (keep) {
      out.points.push_back(curve.first_k() + i);
      out.scores.push_back(t[i]);
    }
  }
  return out;
}

double default_local_max_threshold(const Series& x, double alpha) {
  double rho = 0.0;
  try {
    rho = lag1_acf_differenced(x).clamped;
  } catch (const DegenerateData&) {
  }
  return lookup_critical_value(CritGrid::embedded(), alpha, static_cast<double>(x.size()), rho);
}

ChangePointSet sara_select(const ChangePointSet& initial, const Series& x, const Criterion& crit) {
  ChangePointSet out;
  out.method = "sara";
  out.threshold = initial.threshold;
  if (initial.empty()) return out;
  std::vector<std::size_t> order(initial.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return initial.scores[a] > initial.scores[b];
  });
  double best = 0.0;
  std::size_t best_j = 0;
  for (std::size_t j = 1; j <= order.size(); ++j) {
    std::vector<std::size_t> pts;
    for (std::size_t r = 0; r < j; ++r) pts.push_back(initial.points[order[r]]);
    std::sort(pts.begin(), pts.end());
    const double c = crit.evaluate(x, pts);
    if (best_j == 0 || c < best) {
      best = c;
      best_j = j;
    }
  }
  std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_j));
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return initial.points[a] < initial.points[b];
  });
  for (std::size_t idx : keep) {
    out.points.push_back(initial.points[idx]);
    out.scores.push_back(initial.scores[idx]);
  }
  return out;
}

std::shared_ptr<const NullDistribution> NullCache::get(std::size_t length, double rho, double epsilon,
                                                       DetectorKind kind) {
  const std::size_t len = std::max<std::size_t>(10, (length + 5) / 10 * 10);
  const long rho_key = std::lround(std::clamp(rho, -kRhoClamp, kRhoClamp) * 10.0);
  const long eps_key = std::lround(epsilon * 1e6);
  const auto key = std::make_tuple(len, rho_key, eps_key, static_cast<int>(kind));
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const std::uint64_t stream_seed = mix64(seed_ ^ mix64(len * 1000003ULL + static_cast<std::uint64_t>(rho_key + 100)));
  auto nd = std::make_shared<const NullDistribution>(
      simulate_null_distribution(len, static_cast<double>(rho_key) / 10.0, epsilon, reps_, stream_seed, kind));
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(nd)).first->second;
}

std::size_t NullCache::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

ChangePointSet binary_segmentation(const Series& x, double p0, double epsilon, DetectorKind kind,
                                   const BinsegOptions& options) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgument("p0 must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 1/2)");
  std::unique_ptr<NullCache> own;
  NullCache* cache = options.cache;
  if (!cache) {
    own = std::make_unique<NullCache>(options.reps, options.seed);
    cache = own.get();
  }
  const std::size_t n = x.size();
  const std::size_t min_len = std::max<std::size_t>(trim_count(epsilon, n), 10);

  struct Found {
    std::size_t k;
    double score;
    double p;
  };
  std::vector<Found> found;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{1, n}};
  while (!stack.empty()) {
    const auto [s, e] = stack.back();
    stack.pop_back();
    const std::size_t m = e - s + 1;
    if (m < min_len || m < 2 * trim_count(epsilon, m) + 2) continue;
    const Series sub = x.slice(s, e);
    double rho = 0.0;
    try {
      rho = lag1_acf_differenced(sub).clamped;
    } catch (const InvalidArgument&) {
    } catch (const DegenerateData&) {
    }
    const ScoreCurve curve = score_curve(make_process(kind, sub), epsilon);
    const double stat = test_statistic(curve);
    const double p = p_value(stat, *cache->get(m, rho, epsilon, kind));
    if (!(p < p0)) continue;
    const std::size_t k_local = curve.argmax_k();
    const std::size_t k = s + k_local - 1;
    found.push_back({k, curve.score(k_local), p});
    stack.emplace_back(k + 1, e);
    stack.emplace_back(s, k);
  }
  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.k < b.k; });
  ChangePointSet out;
  out.method = "binseg";
  out.threshold = p0;
  for (const auto& f : found) {
    out.points.push_back(f.k);
    out.scores.push_back(f.score);
    out.p_values.push_back(f.p);
  }
  return out;
}

}  // namespace lsncp
