#pragma once

// Noise models, mean functions and size/power experiments comparing the LSN
// tests with the baselines.

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lsncp/core.hpp"
#include "lsncp/critval.hpp"

namespace lsncp {

struct NoiseModel {
  enum class Kind { Ar, Arma, Bar, Tar, Nar };
  enum class Innovation { Normal, StudentT };

  Kind kind = Kind::Ar;
  double phi = 0.0;       // AR coefficient (ar, arma) or varpi (bar, nar)
  double psi = 0.0;       // MA coefficient (arma)
  double vartheta = 0.0;  // bilinear coefficient (bar)
  double phi1 = 0.0;      // tar coefficient when Z_{i-1} >= 0
  double phi2 = 0.0;      // tar coefficient when Z_{i-1} < 0
  Innovation innovation = Innovation::Normal;
  double df = 5.0;

  static NoiseModel ar(double phi) { return {Kind::Ar, phi}; }
  static NoiseModel arma(double phi, double psi) { return {Kind::Arma, phi, psi}; }
  static NoiseModel bar(double varpi, double vartheta) { return {Kind::Bar, varpi, 0.0, vartheta}; }
  static NoiseModel tar(double phi1, double phi2) { return {Kind::Tar, 0.0, 0.0, 0.0, phi1, phi2}; }
  static NoiseModel nar(double varpi) { return {Kind::Nar, varpi}; }

  /// Throws InvalidArgument outside the stationarity region.
  void validate() const;
  /// Round-trippable text form, e.g. "bar:varpi=0.5,vartheta=0.5".
  std::string name() const;
};

/// Parses the text form produced by NoiseModel::name(); an optional
/// ",innovation=t5" suffix selects Student-t innovations.
NoiseModel parse_noise_model(std::string_view text);

inline constexpr std::size_t kNoiseBurnIn = 1000;

/// n values after a 1000-step burn-in started at Z_0 = 0.
std::vector<double> generate_noise(const NoiseModel& model, std::size_t n, CounterRng& rng);
std::vector<double> generate_noise(const NoiseModel& model, std::size_t n, SeedSpec seed);

struct MeanSpec {
  enum class Kind { Null, Alternating, Case1, Case2, Case3, Custom };
  Kind kind = Kind::Null;
  std::size_t m = 0;     // number of changes (alternating)
  double delta = 0.0;
  /// Custom: mu_i = levels[j] for the j-th segment delimited by the sorted
  /// change points (levels.size() == points.size() + 1).
  std::vector<std::size_t> points;
  std::vector<double> levels;

  static MeanSpec null() { return {}; }
  static MeanSpec alternating(std::size_t m, double delta) { return {Kind::Alternating, m, delta, {}, {}}; }
  static MeanSpec case1(double delta) { return {Kind::Case1, 3, delta, {}, {}}; }
  static MeanSpec case2(double delta) { return {Kind::Case2, 3, delta, {}, {}}; }
  static MeanSpec case3(double delta) { return {Kind::Case3, 3, delta, {}, {}}; }
};

MeanSpec::Kind parse_mean_kind(std::string_view text);
std::string_view to_string(MeanSpec::Kind kind);

/// mu_1..mu_n.
std::vector<double> mean_function(const MeanSpec& spec, std::size_t n);
/// Indices k with mu_k != mu_{k+1}.
std::vector<std::size_t> true_change_points(const MeanSpec& spec, std::size_t n);

enum class TestKind { LsnCusum, LsnWilcoxon, LsnHodgesLehmann, Ks, Shao1, Shao2, Shao3, Zhang };
std::string_view to_string(TestKind t);
TestKind parse_test_kind(std::string_view text);

struct ExperimentConfig {
  enum class Kind { Size, Power };
  Kind kind = Kind::Size;
  std::vector<NoiseModel> models;
  std::vector<std::size_t> ns{200};
  std::vector<TestKind> tests;
  MeanSpec::Kind mean = MeanSpec::Kind::Alternating;
  std::size_t cps = 2;
  std::vector<double> deltas{0.0};
  std::size_t reps = 1000;
  /// Replications per simulated critical value of the baselines without tables.
  std::size_t calibration_reps = 500;
  double alpha = 0.05;
  double epsilon = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// key = value lines, '#' comments. Keys: experiment, model (repeatable),
/// models (';' separated), n, tests, mean, cps, deltas, reps,
/// calibration_reps, alpha, epsilon, seed.
ExperimentConfig parse_experiment_config(std::string_view text);
std::string to_text(const ExperimentConfig& config);

struct ExperimentRow {
  std::string test;
  std::string model;
  std::string mean;
  std::size_t n = 0;
  double delta = 0.0;
  double epsilon = 0.1;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double rate = 0.0;                // rejection rate with the test's own critical values
  std::optional<double> adjusted;   // size-adjusted rate (power experiments)
  std::optional<double> cutoff;     // empirical null quantile behind `adjusted`
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  /// Per (test, n): sqrt(mean over models of (rate - alpha)^2); size runs only.
  std::vector<ExperimentRow> rmse;
};

/// Simulated (1 - alpha) critical values for the statistics without an
/// embedded table, indexed by the AR(1) coefficient matched to rho_hat.
class BaselineCalibrator {
 public:
  BaselineCalibrator(std::size_t reps, double alpha, double epsilon, std::uint64_t seed)
      : reps_(reps), alpha_(alpha), epsilon_(epsilon), seed_(seed) {}
  double critical_value(TestKind test, std::size_t n, double rho_hat);

 private:
  std::size_t reps_;
  double alpha_;
  double epsilon_;
  std::uint64_t seed_;
  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, long>, double> cache_;
};

/// Statistic of one test on one series.
double test_statistic_of(TestKind test, const Series& x, double epsilon);

struct TestDecision {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;
};

/// Statistic and decision with table (LSN), Kolmogorov (KS) or calibrated
/// (other baselines) critical values.
TestDecision decide(TestKind test, const Series& x, double alpha, double epsilon, BaselineCalibrator& calib);

ExperimentTable run_size_experiment(const ExperimentConfig& config);
ExperimentTable run_power_experiment(const ExperimentConfig& config);
ExperimentTable run_experiment(const ExperimentConfig& config);

void write_csv(const ExperimentTable& table, std::ostream& out);

}  // namespace lsncp
