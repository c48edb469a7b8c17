#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LSNCP_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  static fs::path dir() {
    static const fs::path d = [] {
      const fs::path p = fs::temp_directory_path() / ("lsncp_cli_" + std::to_string(::getpid()));
      fs::create_directories(p);
      return p;
    }();
    return d;
  }
  static std::string write(const std::string& name, const std::vector<double>& x, bool header = false) {
    const fs::path p = dir() / name;
    std::ofstream f(p);
    if (header) f << "value\n";
    f.precision(17);
    for (double v : x) f << v << "\n";
    return p.string();
  }
  static std::vector<double> steps(std::size_t n, std::uint64_t seed, const std::vector<std::size_t>& cps,
                                   double delta) {
    auto x = oracle::normal_series(n, seed);
    for (std::size_t i = 1; i <= n; ++i) {
      std::size_t j = 0;
      while (j < cps.size() && i > cps[j]) ++j;
      if (j % 2 == 1) x[i - 1] += delta;
    }
    return x;
  }
  static std::vector<std::size_t> first_column(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::size_t> out;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(std::stoul(line.substr(0, line.find(','))));
    return out;
  }
};

}  // namespace

TEST_F(Cli, TestOnIidDataDoesNotReject) {
  const auto f = write("iid.csv", oracle::normal_series(300, 1), true);
  const auto r = run("test " + f + " --detector cusum --alpha 0.05");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("reject: false"), std::string::npos);
  const auto j = run("test " + f + " --json");
  const auto parsed = nlohmann::json::parse(j.out);
  EXPECT_FALSE(parsed["reject"].get<bool>());
  EXPECT_LT(parsed["statistic"].get<double>(), parsed["critical_value"].get<double>());
}

TEST_F(Cli, RejectionStillExitsZero) {
  const auto f = write("shift.csv", steps(200, 2, {100}, 4.0));
  const auto r = run("test " + f);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("reject: true"), std::string::npos);
}

TEST_F(Cli, WilcoxonMonotoneInvariance) {
  const auto x = oracle::normal_series(200, 3);
  std::vector<double> y(x);
  for (auto& v : y) v = std::exp(v);
  const auto a = nlohmann::json::parse(run("test " + write("w1.csv", x) + " --detector wilcoxon --json").out);
  const auto b = nlohmann::json::parse(run("test " + write("w2.csv", y) + " --detector wilcoxon --json").out);
  EXPECT_EQ(a["statistic"].get<double>(), b["statistic"].get<double>());
}

TEST_F(Cli, SimulatedPValueAndHurst) {
  const auto f = write("p.csv", oracle::normal_series(150, 4));
  const auto j = nlohmann::json::parse(run("test " + f + " --simulate-pvalue --reps 200 --json").out);
  EXPECT_TRUE(j["p_value"].is_number());
  const auto h = nlohmann::json::parse(run("test " + f + " --hurst 0.7 --reps 200 --json").out);
  EXPECT_EQ(h["hurst"].get<double>(), 0.7);
  EXPECT_EQ(run("test " + f + " --alpha 0.2").code, 3);
  EXPECT_EQ(run("test " + f + " --alpha 0.2 --simulate-pvalue --reps 200").code, 0);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("test " + (dir() / "missing.csv").string()).code, 2);
  const fs::path bad = dir() / "bad.csv";
  std::ofstream(bad) << "1\n2\nabc\n";
  EXPECT_EQ(run("test " + bad.string()).code, 2);
  const auto f = write("e.csv", oracle::normal_series(100, 5));
  EXPECT_EQ(run("test " + f + " --epsilon 0.7").code, 3);
  EXPECT_EQ(run("test " + f + " --detector nope").code, 3);
  EXPECT_EQ(run("test " + f + " --unknown-flag").code, 3);
}

TEST_F(Cli, MultivariateInput) {
  const auto a = oracle::normal_series(150, 6), b = oracle::normal_series(150, 7);
  const fs::path p = dir() / "mv.csv";
  {
    std::ofstream f(p);
    f << "a,b\n";
    for (std::size_t i = 0; i < 150; ++i) f << a[i] << "," << b[i] << "\n";
  }
  const auto j = nlohmann::json::parse(run("test " + p.string() + " --reps 200 --json").out);
  EXPECT_EQ(j["dim"].get<int>(), 2);
  EXPECT_EQ(run("scores " + p.string()).code, 0);
  EXPECT_EQ(run("test " + p.string() + " --detector wilcoxon").code, 3);
  EXPECT_EQ(run("test " + p.string() + " --column 1 --json").code, 0);
}

TEST_F(Cli, ScoresCsv) {
  const auto r = run("scores " + write("s.csv", steps(300, 8, {100, 200}, 4.0)));
  EXPECT_EQ(r.code, 0);
  std::size_t headers = 0, pos = 0;
  while ((pos = r.out.find("k,score,argmax_d", pos)) != std::string::npos) ++headers, ++pos;
  EXPECT_EQ(headers, 1u);
  EXPECT_EQ(first_column(r.out).size(), 300u - 2 * 30 - 1);

  const auto c = run("scores " + write("const.csv", std::vector<double>(100, 2.0)));
  std::istringstream in(c.out);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    EXPECT_EQ(std::stod(line.substr(a + 1, b - a - 1)), 0.0);
  }
  EXPECT_EQ(run("scores " + write("ns.csv", oracle::normal_series(100, 9)) + " --nonsymmetric").code, 0);
}

TEST_F(Cli, ScoresLocalMaximaOnFiveChangeFixture) {
  const std::vector<std::size_t> cps{83, 166, 250, 333, 416};
  const auto est = run("estimate " + write("five.csv", steps(500, 10, cps, 4.0)) + " --method localmax");
  const auto got = first_column(est.out);
  ASSERT_EQ(got.size(), 5u);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_LE(std::abs(static_cast<long>(got[j]) - static_cast<long>(cps[j])), 50);
}

TEST_F(Cli, EstimateMethodsAgree) {
  const std::vector<std::size_t> cps{100, 200, 300};
  const auto f = write("three.csv", steps(400, 11, cps, 5.0));
  for (const std::string m : {"localmax", "sara", "binseg"}) {
    const auto r = run("estimate " + f + " --method " + m + " --alpha 0.01 --p0 0.01 --reps 300");
    EXPECT_EQ(r.code, 0);
    const auto got = first_column(r.out);
    for (std::size_t cp : cps) {
      long best = 1 << 20;
      for (std::size_t g : got) best = std::min(best, std::abs(static_cast<long>(g) - static_cast<long>(cp)));
      EXPECT_LE(best, 40) << m;
    }
  }
  EXPECT_EQ(run("estimate " + f + " --method magic").code, 3);
}

TEST_F(Cli, EstimateNullBinsegAndThreshold) {
  const auto f = write("null.csv", oracle::normal_series(200, 12));
  const fs::path out = dir() / "est.csv";
  EXPECT_EQ(run("estimate " + f + " --method binseg --p0 0.01 --reps 300 -o " + out.string()).code, 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "index,score,p_value\n");
  const auto g = write("thr.csv", steps(300, 13, {150}, 3.0));
  EXPECT_EQ(first_column(run("estimate " + g + " --threshold 1e9").out).size(), 0u);
  EXPECT_GE(first_column(run("estimate " + g + " --threshold 0").out).size(), 1u);
}

TEST_F(Cli, Critval) {
  EXPECT_EQ(run("critval --lookup 0.05 100 0").out, "17.5\n");
  const double mid = std::stod(run("critval --lookup 0.05 150 0.05").out);
  EXPECT_GE(mid, 17.5);
  EXPECT_LE(mid, 18.6);
  const auto a = run("critval --simulate --n 120 --reps 150 --seed 5");
  const auto b = run("critval --simulate --n 120 --reps 150 --seed 5");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run("critval --lookup 0.02 100 0").code, 3);
  EXPECT_EQ(run("critval").code, 3);
}

TEST_F(Cli, SimulateWritesReproducibleCsvAndManifest) {
  const fs::path cfg = dir() / "size.cfg";
  std::ofstream(cfg) << "experiment = size\nmodel = ar:phi=0.5\nn = 100\ntests = lsn-cusum, ks\nreps = 40\nseed = 3\n";
  const fs::path o1 = dir() / "run1", o2 = dir() / "run2";
  ASSERT_EQ(run("simulate " + cfg.string() + " -q -o " + o1.string()).code, 0);
  ASSERT_TRUE(fs::exists(o1 / "manifest.json"));
  const auto manifest = nlohmann::json::parse(std::ifstream(o1 / "manifest.json"));
  EXPECT_EQ(manifest["seed"].get<int>(), 3);
  const fs::path echoed = o1 / "config.cfg";
  ASSERT_EQ(run("simulate " + echoed.string() + " -q -o " + o2.string()).code, 0);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(o1 / "results.csv"), slurp(o2 / "results.csv"));

  const fs::path bad = dir() / "bad.cfg";
  std::ofstream(bad) << "model = ar:phi=1.4\ntests = ks\n";
  EXPECT_EQ(run("simulate " + bad.string() + " -q -o " + (dir() / "run3").string()).code, 3);
  const fs::path broken = dir() / "broken.cfg";
  std::ofstream(broken) << "model ar\n";
  EXPECT_EQ(run("simulate " + broken.string() + " -q -o " + (dir() / "run4").string()).code, 2);
  EXPECT_EQ(run("simulate " + (dir() / "none.cfg").string()).code, 2);
}

TEST_F(Cli, BenchSmallSizes) {
  const auto r = run("bench --sizes 100,200 --repeats 1 --json");
  EXPECT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("n")) {
      ++rows;
      EXPECT_TRUE(j["curves_match"].get<bool>());
    }
  }
  EXPECT_EQ(rows, 2);
}
