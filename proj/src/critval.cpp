#include "lsncp/critval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsncp/lsn.hpp"

namespace lsncp {

namespace detail {
std::string_view embedded_critical_value_csv();
}

std::string_view embedded_critical_value_csv() { return detail::embedded_critical_value_csv(); }

namespace {

constexpr double kAxisTol = 1e-9;

std::size_t find_axis(const std::vector<double>& axis, double v) {
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (std::abs(axis[i] - v) <= kAxisTol * std::max(1.0, std::abs(v))) return i;
  }
  return axis.size();
}

void insert_axis(std::vector<double>& axis, double v) {
  if (find_axis(axis, v) == axis.size()) axis.push_back(v);
}

double parse_number(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || !std::isfinite(v)) {
    throw InvalidArgument("critical value table line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

CritGrid CritGrid::parse(std::string_view csv) {
  struct Record {
    double alpha, n, rho, value;
  };
  std::vector<Record> records;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("alpha", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 4) {
      throw InvalidArgument("critical value table line " + std::to_string(line_no) + ": expected 4 fields");
    }
    records.push_back({parse_number(fields[0], line_no), parse_number(fields[1], line_no),
                       parse_number(fields[2], line_no), parse_number(fields[3], line_no)});
  }
  if (records.empty()) throw InvalidArgument("critical value table is empty");

  CritGrid g;
  for (const auto& r : records) {
    insert_axis(g.alphas_, r.alpha);
    insert_axis(g.ns_, r.n);
    insert_axis(g.rhos_, r.rho);
  }
  std::sort(g.alphas_.begin(), g.alphas_.end());
  std::sort(g.ns_.begin(), g.ns_.end());
  std::sort(g.rhos_.begin(), g.rhos_.end());
  const std::size_t total = g.alphas_.size() * g.ns_.size() * g.rhos_.size();
  g.values_.assign(total, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : records) {
    const std::size_t idx = (find_axis(g.alphas_, r.alpha) * g.ns_.size() + find_axis(g.ns_, r.n)) * g.rhos_.size() +
                            find_axis(g.rhos_, r.rho);
    if (!std::isnan(g.values_[idx])) throw InvalidArgument("critical value table has a duplicate record");
    g.values_[idx] = r.value;
  }
  for (double v : g.values_) {
    if (std::isnan(v)) throw InvalidArgument("critical value table is missing a grid cell");
  }
  return g;
}

const CritGrid& CritGrid::embedded() {
  static const CritGrid grid = parse(embedded_critical_value_csv());
  return grid;
}

bool CritGrid::has_alpha(double alpha) const noexcept { return find_axis(alphas_, alpha) != alphas_.size(); }

std::size_t CritGrid::alpha_index(double alpha) const {
  const std::size_t i = find_axis(alphas_, alpha);
  if (i == alphas_.size()) {
    std::string msg = "alpha " + std::to_string(alpha) + " is not tabulated (available:";
    for (double a : alphas_) msg += " " + std::to_string(a);
    throw InvalidArgument(msg + ")");
  }
  return i;
}

double CritGrid::cell(std::size_t a, std::size_t ni, std::size_t ri) const {
  return values_.at((a * ns_.size() + ni) * rhos_.size() + ri);
}

double CritGrid::at(double alpha, double n, double rho) const {
  const std::size_t a = alpha_index(alpha);
  const std::size_t ni = find_axis(ns_, n);
  const std::size_t ri = find_axis(rhos_, rho);
  if (ni == ns_.size() || ri == rhos_.size()) throw InvalidArgument("(n, rho) is not a grid point");
  return cell(a, ni, ri);
}

RhoEstimate lag1_acf_differenced(const Series& x) {
  const std::size_t n = x.size();
  auto b = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-9));
  if (b < 1) b = 1;
  if (n < 2 * b + 4) {
    throw InvalidArgument("series of length " + std::to_string(n) + " is too short for the differenced ACF");
  }
  const std::size_t m = n - b;
  std::vector<double> d(m);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t t = 0; t < m; ++t) d[t] = (x[t + b] - x[t]) * inv_sqrt2;
  const double dbar = mean(d);
  double g0 = 0.0;
  double g1 = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double c = d[t] - dbar;
    g0 += c * c;
    if (t + 1 < m) g1 += c * (d[t + 1] - dbar);
  }
  double spread = 0.0;
  for (double v : d) spread = std::max(spread, std::abs(v - dbar));
  if (!(g0 > 0.0) || spread <= 1e-12 * std::max(1.0, std::abs(dbar))) {
    throw DegenerateData("lag-" + std::to_string(b) + " differences are constant; rho cannot be estimated");
  }
  RhoEstimate r;
  r.raw = g1 / g0;
  r.clamped = std::clamp(r.raw, -kRhoClamp, kRhoClamp);
  r.lag = b;
  return r;
}

namespace {

// Index i with axis[i] <= v <= axis[i+1] and the interpolation weight; v is
// assumed clamped to the axis range.
std::pair<std::size_t, double> bracket(const std::vector<double>& axis, double v, bool log_scale) {
  if (axis.size() == 1) return {0, 0.0};
  const std::size_t exact = find_axis(axis, v);
  if (exact != axis.size()) return {std::min(exact, axis.size() - 2), exact == axis.size() - 1 ? 1.0 : 0.0};
  std::size_t i = 0;
  while (i + 2 < axis.size() && axis[i + 1] < v) ++i;
  const auto tr = [&](double u) { return log_scale ? std::log(u) : u; };
  const double t = (tr(v) - tr(axis[i])) / (tr(axis[i + 1]) - tr(axis[i]));
  return {i, std::clamp(t, 0.0, 1.0)};
}

double lerp(double a, double b, double t) {
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return a + t * (b - a);
}

}  // namespace

double lookup_critical_value(const CritGrid& grid, double alpha, double n, double rho) {
  const std::size_t a = grid.alpha_index(alpha);
  if (!std::isfinite(n) || !std::isfinite(rho)) throw InvalidArgument("n and rho must be finite");
  const auto& ns = grid.ns();
  const auto& rhos = grid.rhos();
  const double nc = std::clamp(n, ns.front(), ns.back());
  const double rc = std::clamp(rho, rhos.front(), rhos.back());
  const auto [ni, tn] = bracket(ns, nc, true);
  const auto [ri, tr] = bracket(rhos, rc, false);
  const std::size_t ni1 = std::min(ni + 1, ns.size() - 1);
  const std::size_t ri1 = std::min(ri + 1, rhos.size() - 1);
  const double lo = lerp(grid.cell(a, ni, ri), grid.cell(a, ni, ri1), tr);
  const double hi = lerp(grid.cell(a, ni1, ri), grid.cell(a, ni1, ri1), tr);
  return lerp(lo, hi, tn);
}

std::vector<double> simulate_ar1(std::size_t n, double rho, CounterRng& rng) {
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("AR(1) coefficient must satisfy |rho| < 1");
  std::vector<double> out(n);
  double z = 0.0;
  for (std::size_t i = 0; i < kBurnIn; ++i) z = rho * z + rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    z = rho * z + rng.normal();
    out[i] = z;
  }
  return out;
}

namespace {

NullDistribution collect(std::vector<double> draws) {
  NullDistribution nd;
  std::sort(draws.begin(), draws.end());
  nd.reps = draws.size();
  nd.sorted = std::move(draws);
  return nd;
}

void check_null_params(std::size_t n, double epsilon, std::size_t reps) {
  if (reps < 100) throw InvalidArgument("null simulation needs at least 100 replications");
  validate_epsilon(epsilon, n);
}

}  // namespace

NullDistribution simulate_null_distribution(std::size_t n, double rho, double epsilon, std::size_t reps,
                                            std::uint64_t seed, DetectorKind detector) {
  check_null_params(n, epsilon, reps);
  if (!(std::abs(rho) < 1.0)) throw InvalidArgument("AR(1) coefficient must satisfy |rho| < 1");
  std::vector<double> draws(reps);
  parallel_for(reps, [&](std::size_t r) {
    CounterRng rng(seed, r);
    const Series x(simulate_ar1(n, rho, rng));
    draws[r] = lsn_test_statistic(x, detector, epsilon);
  });
  NullDistribution nd = collect(std::move(draws));
  nd.n = n;
  nd.rho = rho;
  nd.epsilon = epsilon;
  nd.seed = seed;
  nd.detector = detector;
  return nd;
}

NullDistribution simulate_null_distribution_fbm(double hurst, std::size_t n, double epsilon, std::size_t reps,
                                                std::uint64_t seed) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw InvalidArgument("Hurst parameter must lie in (0, 1)");
  check_null_params(n, epsilon, reps);
  const FgnGenerator gen(hurst, n);
  std::vector<double> draws(reps);
  parallel_for(reps, [&](std::size_t r) {
    CounterRng rng(seed, r);
    const Series x(gen.sample(rng));
    draws[r] = lsn_test_statistic(x, DetectorKind::Cusum, epsilon);
  });
  NullDistribution nd = collect(std::move(draws));
  nd.n = n;
  nd.hurst = hurst;
  nd.epsilon = epsilon;
  nd.seed = seed;
  return nd;
}

double multivariate_test_statistic(const MultiSeries& x, double epsilon) {
  return test_statistic(score_curve_multi(multivariate_plugin_process(x, VectorWindowEstimator::mean()), epsilon));
}

NullDistribution simulate_null_distribution_multi(std::size_t n, const std::vector<double>& rhos, double epsilon,
                                                  std::size_t reps, std::uint64_t seed) {
  check_null_params(n, epsilon, reps);
  if (rhos.empty()) throw InvalidArgument("multivariate null needs at least one column");
  for (double r : rhos) {
    if (!(std::abs(r) < 1.0)) throw InvalidArgument("AR(1) coefficient must satisfy |rho| < 1");
  }
  const std::size_t q = rhos.size();
  std::vector<double> draws(reps);
  parallel_for(reps, [&](std::size_t r) {
    CounterRng rng(seed, r);
    std::vector<double> data(n * q);
    for (std::size_t c = 0; c < q; ++c) {
      const auto col = simulate_ar1(n, rhos[c], rng);
      for (std::size_t t = 0; t < n; ++t) data[t * q + c] = col[t];
    }
    draws[r] = multivariate_test_statistic(MultiSeries(n, q, std::move(data)), epsilon);
  });
  NullDistribution nd = collect(std::move(draws));
  nd.n = n;
  nd.rho = rhos.front();
  nd.epsilon = epsilon;
  nd.seed = seed;
  nd.detector = DetectorKind::Multivariate;
  return nd;
}

double p_value(double stat, const NullDistribution& null) {
  if (null.sorted.empty()) throw InvalidArgument("p-value needs a non-empty null sample");
  const auto first_ge = std::lower_bound(null.sorted.begin(), null.sorted.end(), stat);
  const auto count = static_cast<double>(null.sorted.end() - first_ge);
  return (1.0 + count) / (static_cast<double>(null.sorted.size()) + 1.0);
}

TestResult full_test(const Series& x, DetectorKind kind, const TestOptions& options, const CritGrid& grid) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const bool tabulated = grid.has_alpha(options.alpha);
  if (!tabulated && !options.simulate_pvalue && !options.hurst) {
    throw InvalidArgument("alpha " + std::to_string(options.alpha) +
                          " is not tabulated; request a simulated p-value to use it");
  }
  validate_epsilon(options.epsilon, x.size());

  TestResult res;
  res.test = std::string(to_string(kind));
  res.n = x.size();
  res.epsilon = options.epsilon;
  res.alpha = options.alpha;
  try {
    const RhoEstimate rho = lag1_acf_differenced(x);
    res.rho_hat = rho.clamped;
    res.rho_hat_raw = rho.raw;
  } catch (const DegenerateData&) {
    res.rho_hat = 0.0;
    res.rho_hat_raw = std::numeric_limits<double>::quiet_NaN();
  }

  res.statistic = lsn_test_statistic(x, kind, options.epsilon);

  std::optional<NullDistribution> null;
  if (options.hurst) {
    null = simulate_null_distribution_fbm(*options.hurst, x.size(), options.epsilon, options.reps, options.seed);
  } else if (options.simulate_pvalue) {
    null = simulate_null_distribution(x.size(), res.rho_hat, options.epsilon, options.reps, options.seed);
  }
  if (null) res.p_value = p_value(res.statistic, *null);

  if (tabulated && !options.hurst) {
    res.critical_value = lookup_critical_value(grid, options.alpha, static_cast<double>(x.size()), res.rho_hat);
  } else {
    res.critical_value = null->quantile(1.0 - options.alpha);
  }
  res.reject = res.statistic > res.critical_value;
  res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace lsncp
