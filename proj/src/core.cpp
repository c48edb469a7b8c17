#include "lsncp/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace lsncp {

Series::Series(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("series entry " + std::to_string(i + 1) + " is not finite");
    }
  }
}

Series Series::slice(std::size_t s, std::size_t e) const {
  if (s < 1 || s > e || e > values_.size()) {
    throw InvalidArgument("slice [" + std::to_string(s) + ", " + std::to_string(e) + "] out of range");
  }
  return Series(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(s - 1),
                                    values_.begin() + static_cast<std::ptrdiff_t>(e)));
}

MultiSeries::MultiSeries(std::size_t n, std::size_t q, std::vector<double> row_major)
    : n_(n), q_(q), data_(std::move(row_major)) {
  if (q_ == 0) throw InvalidArgument("multivariate series needs at least one column");
  if (data_.size() != n_ * q_) throw InvalidArgument("multivariate series: data size != n * q");
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("multivariate series contains a non-finite entry");
  }
}

MultiSeries MultiSeries::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) throw InvalidArgument("multivariate series needs at least one column");
  const std::size_t n = columns.front().size();
  const std::size_t q = columns.size();
  std::vector<double> data(n * q);
  for (std::size_t c = 0; c < q; ++c) {
    if (columns[c].size() != n) throw InvalidArgument("columns have different lengths");
    for (std::size_t t = 0; t < n; ++t) data[t * q + c] = columns[c][t];
  }
  return MultiSeries(n, q, std::move(data));
}

std::span<const double> MultiSeries::row(std::size_t t) const {
  return std::span<const double>(data_).subspan((t - 1) * q_, q_);
}

Series MultiSeries::column(std::size_t c) const {
  std::vector<double> out(n_);
  for (std::size_t t = 0; t < n_; ++t) out[t] = data_[t * q_ + c];
  return Series(std::move(out));
}

PrefixSums::PrefixSums(std::span<const double> process)
    : sy_(process.size(), 0.0), syy_(process.size(), 0.0), siy_(process.size(), 0.0) {
  for (std::size_t i = 1; i < process.size(); ++i) {
    const double y = process[i];
    sy_[i] = sy_[i - 1] + y;
    syy_[i] = syy_[i - 1] + y * y;
    siy_[i] = siy_[i - 1] + static_cast<double>(i) * y;
  }
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

CounterRng::CounterRng(SeedSpec spec) noexcept
    : key_(mix64(mix64(spec.seed + kGamma) ^ mix64(spec.stream * 0xd1b54a32d192ed03ULL + 1))) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted by half an ulp so the result is in (0, 1).
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double CounterRng::student_t(double df) {
  if (!(df > 0.0)) throw InvalidArgument("student-t degrees of freedom must be positive");
  const double z = normal();
  std::gamma_distribution<double> chi2_half(df / 2.0, 2.0);
  const double chi2 = chi2_half(*this);
  return z / std::sqrt(chi2 / df);
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("LSNCP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t threads) {
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

std::size_t trim_count(double epsilon, std::size_t n) {
  return static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(n) + 1e-9));
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in (0, 1]");
  const double pos = std::ceil(p * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::max(pos, 1.0)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace lsncp
