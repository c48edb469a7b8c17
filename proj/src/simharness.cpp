#include "lsncp/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "lsncp/baselines.hpp"
#include "lsncp/lsn.hpp"

namespace lsncp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    const std::string piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& s, std::string_view what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw ParseError(std::string(what) + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

std::size_t to_size(const std::string& s, std::string_view what) {
  const double v = to_double(s, what);
  if (v < 0.0 || v != std::floor(v)) throw InvalidArgument(std::string(what) + ": expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void NoiseModel::validate() const {
  const auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
  };
  switch (kind) {
    case Kind::Ar:
      check(std::abs(phi) < 1.0, "ar: |phi| must be < 1");
      break;
    case Kind::Arma:
      check(std::abs(phi) < 1.0, "arma: |phi| must be < 1");
      check(std::abs(psi) < 1.0, "arma: |psi| must be < 1");
      break;
    case Kind::Bar:
      check(phi * phi + vartheta * vartheta < 1.0, "bar: varpi^2 + vartheta^2 must be < 1");
      break;
    case Kind::Tar:
      check(std::abs(phi1) < 1.0 && std::abs(phi2) < 1.0, "tar: |varpi1| and |varpi2| must be < 1");
      break;
    case Kind::Nar:
      check(std::abs(phi) < 1.0, "nar: |varpi| must be < 1");
      break;
  }
  if (innovation == Innovation::StudentT) check(df > 2.0, "student-t innovations need df > 2");
}

std::string NoiseModel::name() const {
  std::string s;
  switch (kind) {
    case Kind::Ar: s = "ar:phi=" + fmt(phi); break;
    case Kind::Arma: s = "arma:phi=" + fmt(phi) + ",psi=" + fmt(psi); break;
    case Kind::Bar: s = "bar:varpi=" + fmt(phi) + ",vartheta=" + fmt(vartheta); break;
    case Kind::Tar: s = "tar:varpi1=" + fmt(phi1) + ",varpi2=" + fmt(phi2); break;
    case Kind::Nar: s = "nar:varpi=" + fmt(phi); break;
  }
  if (innovation == Innovation::StudentT) s += ",innovation=t" + fmt(df);
  return s;
}

NoiseModel parse_noise_model(std::string_view text) {
  const std::string t = trim(text);
  const auto colon = t.find(':');
  const std::string kind = t.substr(0, colon);
  NoiseModel m;
  if (kind == "ar") m.kind = NoiseModel::Kind::Ar;
  else if (kind == "arma") m.kind = NoiseModel::Kind::Arma;
  else if (kind == "bar") m.kind = NoiseModel::Kind::Bar;
  else if (kind == "tar") m.kind = NoiseModel::Kind::Tar;
  else if (kind == "nar") m.kind = NoiseModel::Kind::Nar;
  else throw InvalidArgument("unknown noise model '" + kind + "'");
  if (colon != std::string::npos) {
    for (const auto& kv : split(std::string_view(t).substr(colon + 1), ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("noise model parameter '" + kv + "' lacks '='");
      const std::string key = trim(kv.substr(0, eq));
      const std::string val = trim(kv.substr(eq + 1));
      if (key == "innovation") {
        if (val == "normal") {
          m.innovation = NoiseModel::Innovation::Normal;
        } else if (!val.empty() && val[0] == 't') {
          m.innovation = NoiseModel::Innovation::StudentT;
          m.df = val.size() > 1 ? to_double(val.substr(1), "innovation df") : 5.0;
        } else {
          throw InvalidArgument("unknown innovation '" + val + "'");
        }
        continue;
      }
      const double v = to_double(val, key);
      if (key == "phi" || key == "varpi") m.phi = v;
      else if (key == "psi") m.psi = v;
      else if (key == "vartheta") m.vartheta = v;
      else if (key == "varpi1" || key == "phi1") m.phi1 = v;
      else if (key == "varpi2" || key == "phi2") m.phi2 = v;
      else throw InvalidArgument("unknown noise model parameter '" + key + "'");
    }
  }
  m.validate();
  return m;
}

std::vector<double> generate_noise(const NoiseModel& model, std::size_t n, CounterRng& rng) {
  model.validate();
  const bool t_innov = model.innovation == NoiseModel::Innovation::StudentT;
  const auto draw = [&] { return t_innov ? rng.student_t(model.df) : rng.normal(); };
  const double nar_scale = std::sqrt(1.0 - model.phi * model.phi);
  std::vector<double> out(n);
  double z = 0.0;
  double prev_eps = 0.0;
  for (std::size_t i = 0; i < kNoiseBurnIn + n; ++i) {
    const double eps = draw();
    switch (model.kind) {
      case NoiseModel::Kind::Ar: z = model.phi * z + eps; break;
      case NoiseModel::Kind::Arma: z = model.phi * z + eps + model.psi * prev_eps; break;
      case NoiseModel::Kind::Bar: z = (model.phi + model.vartheta * eps) * z + eps; break;
      case NoiseModel::Kind::Tar: z = (z >= 0.0 ? model.phi1 : model.phi2) * z + eps; break;
      case NoiseModel::Kind::Nar: z = model.phi * std::abs(z) + eps * nar_scale; break;
    }
    prev_eps = eps;
    if (i >= kNoiseBurnIn) out[i - kNoiseBurnIn] = z;
  }
  return out;
}

std::vector<double> generate_noise(const NoiseModel& model, std::size_t n, SeedSpec seed) {
  CounterRng rng(seed);
  return generate_noise(model, n, rng);
}

MeanSpec::Kind parse_mean_kind(std::string_view text) {
  const std::string t = trim(text);
  if (t == "null") return MeanSpec::Kind::Null;
  if (t == "alternating") return MeanSpec::Kind::Alternating;
  if (t == "case1") return MeanSpec::Kind::Case1;
  if (t == "case2") return MeanSpec::Kind::Case2;
  if (t == "case3") return MeanSpec::Kind::Case3;
  throw InvalidArgument("unknown mean function '" + t + "'");
}

std::string_view to_string(MeanSpec::Kind kind) {
  switch (kind) {
    case MeanSpec::Kind::Null: return "null";
    case MeanSpec::Kind::Alternating: return "alternating";
    case MeanSpec::Kind::Case1: return "case1";
    case MeanSpec::Kind::Case2: return "case2";
    case MeanSpec::Kind::Case3: return "case3";
    case MeanSpec::Kind::Custom: return "custom";
  }
  return "unknown";
}

std::vector<double> mean_function(const MeanSpec& spec, std::size_t n) {
  std::vector<double> mu(n, 0.0);
  const double nd = static_cast<double>(n);
  const auto steps = [&](const std::vector<std::pair<std::size_t, double>>& jumps) {
    for (std::size_t i = 1; i <= n; ++i) {
      double v = 0.0;
      for (const auto& [k, w] : jumps) {
        if (i > k) v += w;
      }
      mu[i - 1] = spec.delta * v;
    }
  };
  const auto at = [&](double frac) { return static_cast<std::size_t>(std::floor(frac * nd + 1e-9)); };
  switch (spec.kind) {
    case MeanSpec::Kind::Null:
      break;
    case MeanSpec::Kind::Alternating:
      for (std::size_t i = 1; i <= n; ++i) {
        double v = 0.0;
        for (std::size_t j = 1; j <= spec.m; ++j) {
          // i/n > j/(M+1)  <=>  i (M+1) > j n, in exact integer arithmetic.
          if (i * (spec.m + 1) > j * n) v += (j % 2 == 1) ? 1.0 : -1.0;
        }
        mu[i - 1] = spec.delta * v;
      }
      break;
    case MeanSpec::Kind::Case1:
      steps({{n / 4, 1.0}, {2 * n / 4, -1.0}, {3 * n / 4, 1.0}});
      break;
    case MeanSpec::Kind::Case2:
      steps({{n / 4, 0.5}, {2 * n / 4, -1.0}, {3 * n / 4, 0.5}});
      break;
    case MeanSpec::Kind::Case3:
      steps({{at(0.15), 1.0}, {at(0.3), -1.0}, {at(0.85), 1.0}});
      break;
    case MeanSpec::Kind::Custom: {
      if (spec.levels.size() != spec.points.size() + 1) {
        throw InvalidArgument("custom mean needs one more level than change points");
      }
      if (!std::is_sorted(spec.points.begin(), spec.points.end())) {
        throw InvalidArgument("custom change points must be sorted");
      }
      std::size_t seg = 0;
      for (std::size_t i = 1; i <= n; ++i) {
        while (seg < spec.points.size() && i > spec.points[seg]) ++seg;
        mu[i - 1] = spec.levels[seg];
      }
      break;
    }
  }
  return mu;
}

std::vector<std::size_t> true_change_points(const MeanSpec& spec, std::size_t n) {
  const auto mu = mean_function(spec, n);
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < n; ++k) {
    if (mu[k - 1] != mu[k]) out.push_back(k);
  }
  return out;
}

std::string_view to_string(TestKind t) {
  switch (t) {
    case TestKind::LsnCusum: return "lsn-cusum";
    case TestKind::LsnWilcoxon: return "lsn-wilcoxon";
    case TestKind::LsnHodgesLehmann: return "lsn-hl";
    case TestKind::Ks: return "ks";
    case TestKind::Shao1: return "shao1";
    case TestKind::Shao2: return "shao2";
    case TestKind::Shao3: return "shao3";
    case TestKind::Zhang: return "zhang";
  }
  return "unknown";
}

TestKind parse_test_kind(std::string_view text) {
  const std::string t = trim(text);
  for (TestKind k : {TestKind::LsnCusum, TestKind::LsnWilcoxon, TestKind::LsnHodgesLehmann, TestKind::Ks,
                     TestKind::Shao1, TestKind::Shao2, TestKind::Shao3, TestKind::Zhang}) {
    if (t == to_string(k)) return k;
  }
  throw InvalidArgument("unknown test '" + t + "'");
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw InvalidArgument("config: at least one noise model is required");
  for (const auto& m : models) m.validate();
  if (ns.empty()) throw InvalidArgument("config: at least one sample size is required");
  for (std::size_t n : ns) validate_epsilon(epsilon, n);
  if (tests.empty()) throw InvalidArgument("config: at least one test is required");
  if (reps == 0) throw InvalidArgument("config: reps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("config: alpha must lie in (0, 1)");
  if (deltas.empty()) throw InvalidArgument("config: at least one delta is required");
  const bool needs_table = std::any_of(tests.begin(), tests.end(), [](TestKind t) {
    return t == TestKind::LsnCusum || t == TestKind::LsnWilcoxon || t == TestKind::LsnHodgesLehmann;
  });
  if (needs_table && !CritGrid::embedded().has_alpha(alpha)) {
    throw InvalidArgument("config: alpha must be 0.10, 0.05 or 0.01 for the LSN tests");
  }
  const bool needs_calibration = std::any_of(tests.begin(), tests.end(), [](TestKind t) {
    return t == TestKind::Shao1 || t == TestKind::Shao2 || t == TestKind::Shao3 || t == TestKind::Zhang;
  });
  if (needs_calibration && calibration_reps < 100) {
    throw InvalidArgument("config: calibration_reps must be at least 100");
  }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig c;
  c.models.clear();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key == "experiment") {
      if (val == "size") c.kind = ExperimentConfig::Kind::Size;
      else if (val == "power") c.kind = ExperimentConfig::Kind::Power;
      else throw InvalidArgument("config: experiment must be size or power");
    } else if (key == "model") {
      c.models.push_back(parse_noise_model(val));
    } else if (key == "models") {
      for (const auto& m : split(val, ';')) c.models.push_back(parse_noise_model(m));
    } else if (key == "n") {
      c.ns.clear();
      for (const auto& v : split(val, ',')) c.ns.push_back(to_size(v, "n"));
    } else if (key == "tests") {
      c.tests.clear();
      for (const auto& v : split(val, ',')) c.tests.push_back(parse_test_kind(v));
    } else if (key == "mean") {
      c.mean = parse_mean_kind(val);
    } else if (key == "cps") {
      c.cps = to_size(val, "cps");
    } else if (key == "deltas") {
      c.deltas.clear();
      for (const auto& v : split(val, ',')) c.deltas.push_back(to_double(v, "deltas"));
    } else if (key == "reps") {
      c.reps = to_size(val, "reps");
    } else if (key == "calibration_reps") {
      c.calibration_reps = to_size(val, "calibration_reps");
    } else if (key == "alpha") {
      c.alpha = to_double(val, "alpha");
    } else if (key == "epsilon") {
      c.epsilon = to_double(val, "epsilon");
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_size(val, "seed"));
    } else {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment = " << (c.kind == ExperimentConfig::Kind::Size ? "size" : "power") << "\n";
  for (const auto& m : c.models) os << "model = " << m.name() << "\n";
  os << "n = ";
  for (std::size_t i = 0; i < c.ns.size(); ++i) os << (i ? ", " : "") << c.ns[i];
  os << "\ntests = ";
  for (std::size_t i = 0; i < c.tests.size(); ++i) os << (i ? ", " : "") << to_string(c.tests[i]);
  os << "\nmean = " << to_string(c.mean) << "\ncps = " << c.cps << "\ndeltas = ";
  for (std::size_t i = 0; i < c.deltas.size(); ++i) os << (i ? ", " : "") << fmt(c.deltas[i]);
  os << "\nreps = " << c.reps << "\ncalibration_reps = " << c.calibration_reps << "\nalpha = " << fmt(c.alpha)
     << "\nepsilon = " << fmt(c.epsilon) << "\nseed = " << c.seed << "\n";
  return os.str();
}

double test_statistic_of(TestKind test, const Series& x, double epsilon) {
  switch (test) {
    case TestKind::LsnCusum: return lsn_test_statistic(x, DetectorKind::Cusum, epsilon);
    case TestKind::LsnWilcoxon: return lsn_test_statistic(x, DetectorKind::Wilcoxon, epsilon);
    case TestKind::LsnHodgesLehmann: return lsn_test_statistic(x, DetectorKind::HodgesLehmann, epsilon);
    case TestKind::Ks:
      try {
        return ks_test(x).statistic;
      } catch (const DegenerateData&) {
        return 0.0;
      }
    case TestKind::Shao1: return shao_one_cp(x);
    case TestKind::Shao2: return shao_m_cp(x, 2, epsilon);
    case TestKind::Shao3: return shao_m_cp(x, 3, epsilon);
    case TestKind::Zhang: return zhang_test(x, epsilon);
  }
  throw InvalidArgument("unknown test");
}

namespace {

double rho_of(const Series& x) {
  try {
    return lag1_acf_differenced(x).clamped;
  } catch (const DegenerateData&) {
    return 0.0;
  }
}

long rho_key(double rho) { return std::lround(std::clamp(rho, -kRhoClamp, kRhoClamp) * 10.0); }

bool is_lsn(TestKind t) {
  return t == TestKind::LsnCusum || t == TestKind::LsnWilcoxon || t == TestKind::LsnHodgesLehmann;
}

}  // namespace

double BaselineCalibrator::critical_value(TestKind test, std::size_t n, double rho_hat) {
  const long rk = rho_key(rho_hat);
  const auto key = std::make_tuple(static_cast<int>(test), n, rk);
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double rho = static_cast<double>(rk) / 10.0;
  const std::uint64_t stream_seed =
      mix64(seed_ ^ mix64((static_cast<std::uint64_t>(test) + 1) * 0x9e37ULL + n * 1000003ULL +
                          static_cast<std::uint64_t>(rk + 100)));
  std::vector<double> draws(reps_);
  parallel_for(reps_, [&](std::size_t r) {
    CounterRng rng(stream_seed, r);
    draws[r] = test_statistic_of(test, Series(simulate_ar1(n, rho, rng)), epsilon_);
  });
  std::sort(draws.begin(), draws.end());
  const double cv = empirical_quantile(draws, 1.0 - alpha_);
  cache_.emplace(key, cv);
  return cv;
}

TestDecision decide(TestKind test, const Series& x, double alpha, double epsilon, BaselineCalibrator& calib) {
  TestDecision d;
  d.statistic = test_statistic_of(test, x, epsilon);
  if (is_lsn(test)) {
    d.critical_value = lookup_critical_value(CritGrid::embedded(), alpha, static_cast<double>(x.size()), rho_of(x));
  } else if (test == TestKind::Ks) {
    d.critical_value = kolmogorov_quantile(1.0 - alpha);
  } else {
    d.critical_value = calib.critical_value(test, x.size(), rho_of(x));
  }
  d.reject = d.statistic > d.critical_value;
  return d;
}

namespace {

// Statistics and rho_hat for every (replication, delta) of one (model, n) cell.
struct CellDraws {
  std::vector<double> deltas;
  // stats[d][t][r]
  std::vector<std::vector<std::vector<double>>> stats;
  // rho[d][r]
  std::vector<std::vector<double>> rho;
};

CellDraws simulate_cell(const ExperimentConfig& c, std::size_t model_idx, std::size_t n,
                        const std::vector<double>& deltas, MeanSpec::Kind mean_kind) {
  CellDraws out;
  out.deltas = deltas;
  const std::size_t nt = c.tests.size();
  out.stats.assign(deltas.size(), std::vector<std::vector<double>>(nt, std::vector<double>(c.reps, 0.0)));
  out.rho.assign(deltas.size(), std::vector<double>(c.reps, 0.0));
  std::vector<std::vector<double>> mus;
  for (double delta : deltas) {
    MeanSpec spec;
    spec.kind = mean_kind;
    spec.m = c.cps;
    spec.delta = delta;
    mus.push_back(mean_function(spec, n));
  }
  const std::uint64_t cell_seed = mix64(c.seed ^ mix64(model_idx * 0x100000001b3ULL + n));
  const NoiseModel& model = c.models[model_idx];
  parallel_for(c.reps, [&](std::size_t r) {
    const auto noise = generate_noise(model, n, SeedSpec{cell_seed, r});
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      std::vector<double> xv(n);
      for (std::size_t i = 0; i < n; ++i) xv[i] = mus[d][i] + noise[i];
      const Series x(std::move(xv));
      out.rho[d][r] = rho_of(x);
      for (std::size_t t = 0; t < nt; ++t) out.stats[d][t][r] = test_statistic_of(c.tests[t], x, c.epsilon);
    }
  });
  return out;
}

double raw_rate(const ExperimentConfig& c, TestKind test, std::size_t n, const std::vector<double>& stats,
                const std::vector<double>& rho, BaselineCalibrator& calib) {
  std::size_t rejections = 0;
  for (std::size_t r = 0; r < stats.size(); ++r) {
    double cv = 0.0;
    if (is_lsn(test)) {
      cv = lookup_critical_value(CritGrid::embedded(), c.alpha, static_cast<double>(n), rho[r]);
    } else if (test == TestKind::Ks) {
      cv = kolmogorov_quantile(1.0 - c.alpha);
    } else {
      cv = calib.critical_value(test, n, rho[r]);
    }
    if (stats[r] > cv) ++rejections;
  }
  return static_cast<double>(rejections) / static_cast<double>(stats.size());
}

ExperimentRow base_row(const ExperimentConfig& c, TestKind test, const NoiseModel& m, std::size_t n, double delta,
                       MeanSpec::Kind mean_kind) {
  ExperimentRow row;
  row.test = std::string(to_string(test));
  row.model = m.name();
  row.mean = std::string(to_string(mean_kind));
  row.n = n;
  row.delta = delta;
  row.epsilon = c.epsilon;
  row.reps = c.reps;
  row.seed = c.seed;
  row.alpha = c.alpha;
  return row;
}

}  // namespace

ExperimentTable run_size_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentTable table;
  BaselineCalibrator calib(config.calibration_reps, config.alpha, config.epsilon, config.seed);
  for (std::size_t n : config.ns) {
    for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
      const CellDraws cell = simulate_cell(config, mi, n, {0.0}, MeanSpec::Kind::Null);
      for (std::size_t t = 0; t < config.tests.size(); ++t) {
        ExperimentRow row = base_row(config, config.tests[t], config.models[mi], n, 0.0, MeanSpec::Kind::Null);
        row.rate = raw_rate(config, config.tests[t], n, cell.stats[0][t], cell.rho[0], calib);
        table.rows.push_back(row);
      }
    }
    for (TestKind test : config.tests) {
      double acc = 0.0;
      std::size_t count = 0;
      for (const auto& row : table.rows) {
        if (row.n == n && row.test == to_string(test)) {
          acc += (row.rate - config.alpha) * (row.rate - config.alpha);
          ++count;
        }
      }
      ExperimentRow r = base_row(config, test, config.models.front(), n, 0.0, MeanSpec::Kind::Null);
      r.model = "rmse";
      r.rate = std::sqrt(acc / static_cast<double>(count));
      table.rmse.push_back(r);
    }
  }
  return table;
}

ExperimentTable run_power_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentTable table;
  BaselineCalibrator calib(config.calibration_reps, config.alpha, config.epsilon, config.seed);
  std::vector<double> deltas = config.deltas;
  std::size_t null_idx = deltas.size();
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    if (deltas[d] == 0.0) null_idx = d;
  }
  const bool extra_null = null_idx == deltas.size();
  if (extra_null) deltas.push_back(0.0);

  for (std::size_t n : config.ns) {
    for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
      const CellDraws cell = simulate_cell(config, mi, n, deltas, config.mean);
      for (std::size_t t = 0; t < config.tests.size(); ++t) {
        std::vector<double> null_stats = cell.stats[null_idx][t];
        std::sort(null_stats.begin(), null_stats.end());
        const double cutoff = empirical_quantile(null_stats, 1.0 - config.alpha);
        for (std::size_t d = 0; d < config.deltas.size(); ++d) {
          ExperimentRow row = base_row(config, config.tests[t], config.models[mi], n, deltas[d], config.mean);
          row.rate = raw_rate(config, config.tests[t], n, cell.stats[d][t], cell.rho[d], calib);
          const auto& s = cell.stats[d][t];
          const auto above = std::count_if(s.begin(), s.end(), [&](double v) { return v > cutoff; });
          row.adjusted = static_cast<double>(above) / static_cast<double>(s.size());
          row.cutoff = cutoff;
          table.rows.push_back(row);
        }
      }
    }
  }
  return table;
}

ExperimentTable run_experiment(const ExperimentConfig& config) {
  return config.kind == ExperimentConfig::Kind::Size ? run_size_experiment(config) : run_power_experiment(config);
}

void write_csv(const ExperimentTable& table, std::ostream& out) {
  out << "test,model,mean,n,delta,epsilon,reps,seed,alpha,rate,adjusted_rate,cutoff\n";
  const auto emit = [&](const ExperimentRow& r) {
    out << r.test << ",\"" << r.model << "\"," << r.mean << "," << r.n << "," << fmt(r.delta) << ","
        << fmt(r.epsilon) << "," << r.reps << "," << r.seed << "," << fmt(r.alpha) << "," << fmt(r.rate) << ","
        << (r.adjusted ? fmt(*r.adjusted) : "") << "," << (r.cutoff ? fmt(*r.cutoff) : "") << "\n";
  };
  for (const auto& r : table.rows) emit(r);
  for (const auto& r : table.rmse) emit(r);
}

}  // namespace lsncp
