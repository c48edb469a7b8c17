#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsncp/baselines.hpp"
#include "lsncp/bench.hpp"
#include "lsncp/core.hpp"
#include "lsncp/critval.hpp"
#include "lsncp/detectors.hpp"
#include "lsncp/estimate.hpp"
#include "lsncp/io.hpp"
#include "lsncp/lsn.hpp"
#include "lsncp/simharness.hpp"

#ifndef LSNCP_VERSION
#define LSNCP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsncp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitParam = 3;

struct Common {
  std::string input;
  std::string detector = "cusum";
  double epsilon = 0.1;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  bool json = false;
  std::size_t reps = 1000;
  std::optional<double> hurst;
  bool simulate_pvalue = false;
  std::string output;
  std::optional<std::size_t> column;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Output goes to --output when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

NumericTable load(const Common& c) {
  NumericTable t = read_numeric_table(c.input);
  if (c.column) {
    if (*c.column >= t.cols()) {
      throw InvalidArgument("column " + std::to_string(*c.column) + " out of range (input has " +
                            std::to_string(t.cols()) + ")");
    }
    NumericTable one;
    if (!t.header.empty()) one.header = {t.header[*c.column]};
    one.columns = {t.columns[*c.column]};
    return one;
  }
  return t;
}

bool multivariate(const NumericTable& t) { return t.cols() > 1; }

MultiSeries to_multi(const NumericTable& t) { return MultiSeries::from_columns(t.columns); }

void require_mean_detector(const Common& c) {
  const DetectorKind k = parse_detector(c.detector);
  if (k != DetectorKind::PluginMean && k != DetectorKind::Cusum && k != DetectorKind::Multivariate) {
    throw InvalidArgument("multi-column input supports only the mean detector (got '" + c.detector + "')");
  }
}

double rho_or_zero(const Series& x) {
  try {
    return lag1_acf_differenced(x).clamped;
  } catch (const DegenerateData&) {
    return 0.0;
  }
}

void add_common(CLI::App* app, Common& c, bool needs_input) {
  if (needs_input) app->add_option("input", c.input, "CSV file with one observation per line")->required();
  app->add_option("--detector", c.detector, "cusum, wilcoxon, hl, plugin:mean, plugin:median, plugin:var");
  app->add_option("--epsilon", c.epsilon, "trimming fraction in (0, 0.5)");
  app->add_option("--alpha", c.alpha, "significance level");
  app->add_option("--seed", c.seed, "simulation seed");
  app->add_flag("--json", c.json, "machine-readable output");
  app->add_option("--reps", c.reps, "Monte Carlo replications");
  app->add_option("--hurst", c.hurst, "simulate the null from fractional Gaussian noise with this Hurst index");
  app->add_flag("--simulate-pvalue", c.simulate_pvalue, "simulate the null for a p-value");
  app->add_option("-o,--output", c.output, "output file (default stdout)");
  if (needs_input) app->add_option("--column", c.column, "use only this zero-based column");
}

int cmd_test(const Common& c) {
  const NumericTable t = load(c);
  if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) throw InvalidArgument("epsilon must lie in (0, 0.5)");
  Sink sink(c.output);
  auto& out = sink.out();

  if (multivariate(t)) {
    require_mean_detector(c);
    if (c.hurst) throw InvalidArgument("--hurst is not available for multi-column input");
    const auto t0 = std::chrono::steady_clock::now();
    const MultiSeries x = to_multi(t);
    std::vector<double> rhos;
    for (std::size_t col = 0; col < x.dim(); ++col) rhos.push_back(rho_or_zero(x.column(col)));
    const double stat = multivariate_test_statistic(x, c.epsilon);
    const NullDistribution null = simulate_null_distribution_multi(x.size(), rhos, c.epsilon, c.reps, c.seed);
    const double crit = null.quantile(1.0 - c.alpha);
    const double p = p_value(stat, null);
    const bool reject = stat > crit;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.json) {
      out << json{{"test", "lsn-multivariate"}, {"n", x.size()},       {"dim", x.dim()},
                  {"statistic", num_json(stat)}, {"epsilon", c.epsilon}, {"alpha", c.alpha},
                  {"rho_hat", rhos},            {"critical_value", num_json(crit)},
                  {"p_value", num_json(p)},     {"reject", reject},    {"reps", c.reps},
                  {"seed", c.seed},             {"elapsed_seconds", elapsed}}
                 .dump()
          << "\n";
    } else {
      out << "test: lsn-multivariate\n"
          << "n: " << x.size() << "\n"
          << "dim: " << x.dim() << "\n"
          << "statistic: " << num(stat) << "\n"
          << "rho_hat:";
      for (double r : rhos) out << " " << num(r);
      out << "\ncritical_value: " << num(crit) << "\n"
          << "p_value: " << num(p) << "\n"
          << "reject: " << (reject ? "true" : "false") << "\n";
    }
    return kExitOk;
  }

  const Series x(t.columns.front());
  TestOptions opt;
  opt.epsilon = c.epsilon;
  opt.alpha = c.alpha;
  opt.simulate_pvalue = c.simulate_pvalue;
  opt.reps = c.reps;
  opt.seed = c.seed;
  opt.hurst = c.hurst;
  const TestResult r = full_test(x, parse_detector(c.detector), opt);
  if (c.json) {
    json j{{"test", r.test},
           {"detector", std::string(to_string(parse_detector(c.detector)))},
           {"n", r.n},
           {"statistic", num_json(r.statistic)},
           {"epsilon", r.epsilon},
           {"alpha", r.alpha},
           {"rho_hat", num_json(r.rho_hat)},
           {"rho_hat_raw", num_json(r.rho_hat_raw)},
           {"critical_value", num_json(r.critical_value)},
           {"p_value", r.p_value ? num_json(*r.p_value) : json(nullptr)},
           {"reject", r.reject},
           {"seed", c.seed},
           {"elapsed_seconds", r.elapsed_seconds}};
    if (c.hurst) j["hurst"] = *c.hurst;
    out << j.dump() << "\n";
  } else {
    out << "test: " << r.test << "\n"
        << "n: " << r.n << "\n"
        << "statistic: " << num(r.statistic) << "\n"
        << "rho_hat: " << num(r.rho_hat) << " (raw " << num(r.rho_hat_raw) << ")\n"
        << "critical_value: " << num(r.critical_value) << "\n";
    if (r.p_value) out << "p_value: " << num(*r.p_value) << "\n";
    out << "reject: " << (r.reject ? "true" : "false") << "\n";
  }
  return kExitOk;
}

int cmd_scores(const Common& c, bool nonsymmetric) {
  const NumericTable t = load(c);
  ScoreCurve curve;
  if (multivariate(t)) {
    require_mean_detector(c);
    if (nonsymmetric) throw InvalidArgument("--nonsymmetric is univariate only");
    curve = score_curve_multi(multivariate_plugin_process(to_multi(t), VectorWindowEstimator::mean()), c.epsilon);
  } else {
    const Series x(t.columns.front());
    validate_epsilon(c.epsilon, x.size());
    const GlobalProcess d = make_process(parse_detector(c.detector), x);
    curve = nonsymmetric ? score_curve_nonsymmetric(d, c.epsilon) : score_curve(d, c.epsilon);
  }
  Sink sink(c.output);
  auto& out = sink.out();
  if (!c.json) out << (nonsymmetric ? "k,score,argmax_d_left,argmax_d_right\n" : "k,score,argmax_d\n");
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::size_t k = curve.first_k() + i;
    if (c.json) {
      json j{{"k", k}, {"score", num_json(curve.scores[i])}};
      if (nonsymmetric) {
        j["argmax_d_left"] = curve.argmax_d[i];
        j["argmax_d_right"] = curve.argmax_d_right[i];
      } else {
        j["argmax_d"] = curve.argmax_d[i];
      }
      out << j.dump() << "\n";
    } else {
      out << k << "," << num(curve.scores[i]) << "," << curve.argmax_d[i];
      if (nonsymmetric) out << "," << curve.argmax_d_right[i];
      out << "\n";
    }
  }
  return kExitOk;
}

struct EstimateArgs {
  std::string method = "localmax";
  std::optional<double> threshold;
  std::optional<double> p0;
  double penalty = 1.0;
};

int cmd_estimate(const Common& c, const EstimateArgs& a) {
  if (a.method != "localmax" && a.method != "sara" && a.method != "binseg") {
    throw InvalidArgument("unknown method '" + a.method + "' (expected localmax, sara or binseg)");
  }
  const NumericTable t = load(c);
  if (multivariate(t)) throw InvalidArgument("estimate needs a single column (use --column)");
  const Series x(t.columns.front());
  validate_epsilon(c.epsilon, x.size());
  const DetectorKind kind = parse_detector(c.detector);

  ChangePointSet cps;
  if (a.method == "binseg") {
    const double p0 = a.p0.value_or(c.alpha);
    if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgument("p0 must lie in (0, 1)");
    BinsegOptions opt;
    opt.reps = c.reps;
    opt.seed = c.seed;
    cps = binary_segmentation(x, p0, c.epsilon, kind, opt);
  } else {
    const ScoreCurve curve = score_curve(make_process(kind, x), c.epsilon);
    const double thr = a.threshold ? *a.threshold : default_local_max_threshold(x, c.alpha);
    cps = local_max_cps(curve, thr);
    if (a.method == "sara" && !cps.empty()) {
      Criterion crit;
      crit.penalty = a.penalty;
      cps = sara_select(cps, x, crit);
    }
  }

  Sink sink(c.output);
  auto& out = sink.out();
  if (!c.json) out << "index,score,p_value\n";
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const bool has_p = i < cps.p_values.size();
    if (c.json) {
      out << json{{"index", cps.points[i]},
                  {"score", num_json(cps.scores[i])},
                  {"p_value", has_p ? num_json(cps.p_values[i]) : json(nullptr)},
                  {"method", a.method}}
                 .dump()
          << "\n";
    } else {
      out << cps.points[i] << "," << num(cps.scores[i]) << "," << (has_p ? num(cps.p_values[i]) : "") << "\n";
    }
  }
  return kExitOk;
}

struct CritvalArgs {
  std::vector<double> lookup;
  bool simulate = false;
  std::size_t n = 0;
  double rho = 0.0;
};

int cmd_critval(const Common& c, const CritvalArgs& a) {
  Sink sink(c.output);
  auto& out = sink.out();
  if (!a.lookup.empty()) {
    if (a.simulate) throw InvalidArgument("--lookup and --simulate are exclusive");
    const double v = lookup_critical_value(CritGrid::embedded(), a.lookup[0], a.lookup[1], a.lookup[2]);
    if (c.json) {
      out << json{{"alpha", a.lookup[0]}, {"n", a.lookup[1]}, {"rho", a.lookup[2]}, {"critical_value", v}}.dump()
          << "\n";
    } else {
      out << num(v) << "\n";
    }
    return kExitOk;
  }
  if (!a.simulate) throw InvalidArgument("critval needs --lookup ALPHA N RHO or --simulate");
  if (a.n == 0) throw InvalidArgument("--simulate needs --n");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const NullDistribution null =
      c.hurst ? simulate_null_distribution_fbm(*c.hurst, a.n, c.epsilon, c.reps, c.seed)
              : simulate_null_distribution(a.n, a.rho, c.epsilon, c.reps, c.seed, parse_detector(c.detector));
  const double q = null.quantile(1.0 - c.alpha);
  if (c.json) {
    json j{{"alpha", c.alpha}, {"n", a.n},       {"rho", a.rho},
           {"epsilon", c.epsilon}, {"reps", c.reps}, {"seed", c.seed},
           {"detector", std::string(to_string(parse_detector(c.detector)))},
           {"critical_value", q}};
    if (c.hurst) j["hurst"] = *c.hurst;
    out << j.dump() << "\n";
  } else {
    out << num(q) << "\n";
  }
  return kExitOk;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool quiet) {
  const std::string text = slurp(config_path);
  const ExperimentConfig config = parse_experiment_config(text);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create '" + out_dir + "': " + ec.message());

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentTable table = run_experiment(config);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path csv_path = fs::path(out_dir) / "results.csv";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw InputError("cannot write '" + csv_path.string() + "'");
    write_csv(table, csv);
  }
  const fs::path config_copy = fs::path(out_dir) / "config.cfg";
  {
    std::ofstream cfg(config_copy);
    if (!cfg) throw InputError("cannot write '" + config_copy.string() + "'");
    cfg << to_text(config);
  }
  const json manifest{{"tool", "lsncp"},
                      {"version", LSNCP_VERSION},
                      {"compiler", __VERSION__},
                      {"config_source", config_path},
                      {"config", to_text(config)},
                      {"seed", config.seed},
                      {"threads", default_thread_count()},
                      {"results", csv_path.filename().string()},
                      {"rows", table.rows.size() + table.rmse.size()},
                      {"elapsed_seconds", elapsed}};
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  std::ofstream mf(manifest_path);
  if (!mf) throw InputError("cannot write '" + manifest_path.string() + "'");
  mf << manifest.dump(2) << "\n";
  if (!quiet) std::cout << "wrote " << csv_path.string() << " and " << manifest_path.string() << "\n";
  return kExitOk;
}

int cmd_bench(const Common& c, const std::vector<std::size_t>& sizes, std::size_t repeats) {
  BenchOptions opt;
  opt.sizes = sizes;
  opt.repeats = repeats;
  opt.epsilon = c.epsilon;
  opt.seed = c.seed;
  const auto rows = run_bench(opt);
  std::vector<std::size_t> ns;
  std::vector<double> fast;
  for (const auto& r : rows) {
    ns.push_back(r.n);
    fast.push_back(r.recursive_seconds);
  }
  const double slope = rows.size() >= 2 ? loglog_slope(ns, fast) : std::numeric_limits<double>::quiet_NaN();
  Sink sink(c.output);
  auto& out = sink.out();
  if (c.json) {
    for (const auto& r : rows) {
      out << json{{"n", r.n},
                  {"recursive_seconds", r.recursive_seconds},
                  {"brute_seconds", num_json(r.brute_seconds)},
                  {"speedup", num_json(r.speedup())},
                  {"curves_match", r.curves_match}}
                 .dump()
          << "\n";
    }
    out << json{{"loglog_slope_recursive", num_json(slope)}}.dump() << "\n";
  } else {
    out << std::setw(6) << "n" << std::setw(16) << "recursive_s" << std::setw(16) << "brute_s" << std::setw(12)
        << "speedup" << std::setw(8) << "match" << "\n";
    for (const auto& r : rows) {
      char line[96];
      std::snprintf(line, sizeof line, "%6zu%16.6f%16.6f%12.1f%8s\n", r.n, r.recursive_seconds, r.brute_seconds,
                    r.speedup(), r.curves_match ? "yes" : "NO");
      out << line;
    }
    out << "log-log slope (recursive): " << num(slope) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally self-normalized multiple change-point tests"};
  app.set_version_flag("--version", LSNCP_VERSION);
  app.require_subcommand(1);

  Common c;
  auto* test = app.add_subcommand("test", "test for mean changes");
  add_common(test, c, true);

  bool nonsymmetric = false;
  auto* scores = app.add_subcommand("scores", "emit the LSN score curve as CSV");
  add_common(scores, c, true);
  scores->add_flag("--nonsymmetric", nonsymmetric, "maximize over independent left and right half-widths");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "estimate change-point locations");
  add_common(estimate, c, true);
  estimate->add_option("--method", ea.method, "localmax, sara or binseg");
  estimate->add_option("--threshold", ea.threshold, "score threshold for localmax and sara");
  estimate->add_option("--p0", ea.p0, "segment p-value threshold for binseg (default alpha)");
  estimate->add_option("--penalty", ea.penalty, "BIC penalty multiplier for sara");

  CritvalArgs ca;
  auto* critval = app.add_subcommand("critval", "look up or simulate critical values");
  add_common(critval, c, false);
  critval->add_option("--lookup", ca.lookup, "ALPHA N RHO")->expected(3);
  critval->add_flag("--simulate", ca.simulate, "simulate one grid cell");
  critval->add_option("--n", ca.n, "sample size for --simulate");
  critval->add_option("--rho", ca.rho, "AR(1) coefficient for --simulate");

  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  auto* simulate = app.add_subcommand("simulate", "run a size or power experiment");
  simulate->add_option("config", config_path, "experiment config file")->required();
  simulate->add_option("-o,--output", out_dir, "output directory");
  simulate->add_flag("-q,--quiet", quiet, "no progress line");

  std::vector<std::size_t> sizes{500, 1000, 2000, 4000};
  std::size_t repeats = 3;
  auto* bench = app.add_subcommand("bench", "time recursive versus brute-force score curves");
  add_common(bench, c, false);
  bench->add_option("--sizes", sizes, "sample sizes")->delimiter(',');
  bench->add_option("--repeats", repeats, "timing repeats per size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParam;
  }

  try {
    if (*test) return cmd_test(c);
    if (*scores) return cmd_scores(c, nonsymmetric);
    if (*estimate) return cmd_estimate(c, ea);
    if (*critval) return cmd_critval(c, ca);
    if (*simulate) return cmd_simulate(config_path, out_dir, quiet);
    if (*bench) return cmd_bench(c, sizes, repeats);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParam;
  } catch (const DegenerateData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParam;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParam;
  }
  return kExitOk;
}
