#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "lsncp/critval.hpp"

namespace lsncp {

namespace {

// Plan creation and destruction in FFTW are not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t m) : data(fftw_alloc_complex(m)) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double h2 = 2.0 * hurst;
  const double down = lag == 0 ? 1.0 : std::pow(k - 1.0, h2);
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + down);
}

FgnGenerator::FgnGenerator(double hurst, std::size_t n) : hurst_(hurst), n_(n), m_(2 * n) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidArgument("Hurst parameter must lie in (0, 1)");
  if (n < 2) throw InvalidArgument("fractional Gaussian noise needs n >= 2");

  FftwBuffer in(m_);
  FftwBuffer out(m_);
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(m_), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan_) throw std::runtime_error("FFTW plan creation failed");

  // First row of the circulant: gamma(0..n), gamma(n-1..1).
  for (std::size_t j = 0; j < m_; ++j) {
    const std::size_t lag = j <= n_ ? j : m_ - j;
    in.data[j][0] = fgn_autocovariance(hurst, lag);
    in.data[j][1] = 0.0;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), in.data, out.data);

  double peak = 0.0;
  for (std::size_t j = 0; j < m_; ++j) peak = std::max(peak, std::abs(out.data[j][0]));
  sqrt_lambda_.resize(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    const double lambda = out.data[j][0];
    if (lambda < -1e-10 * peak) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(static_cast<fftw_plan>(plan_));
      plan_ = nullptr;
      throw DegenerateData("circulant embedding is not positive semidefinite (eigenvalue " + std::to_string(lambda) +
                           ")");
    }
    sqrt_lambda_[j] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m_));
  }
}

FgnGenerator::~FgnGenerator() {
  if (plan_) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

std::vector<double> FgnGenerator::sample(CounterRng& rng) const {
  FftwBuffer in(m_);
  FftwBuffer out(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    in.data[j][0] = sqrt_lambda_[j] * rng.normal();
    in.data[j][1] = sqrt_lambda_[j] * rng.normal();
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), in.data, out.data);
  std::vector<double> x(n_);
  for (std::size_t t = 0; t < n_; ++t) x[t] = out.data[t][0];
  return x;
}

}  // namespace lsncp
