#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "json.hpp"
#include "rjfit/pipeline.hpp"
#include "rjfit/report_json.hpp"

namespace fs = std::filesystem;
using namespace rjfit;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("rjfit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RJFIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_lines(const fs::path& p, const std::vector<double>& xs) {
  std::ofstream out(p);
  out.precision(17);
  for (double x : xs) out << x << "\n";
}

}  // namespace

TEST(ParseSeries, CommentsBlanksAndSigns) {
  const auto v = parse_series("# header\n1.5\n\n  -2e-3 \r\n+4\n# tail\n");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], 1.5);
  EXPECT_EQ(v[1], -2e-3);
  EXPECT_EQ(v[2], 4.0);
}

TEST(ParseSeries, RejectsGarbageAndNonFinite) {
  EXPECT_THROW(parse_series("1.0\nabc\n"), input_error);
  EXPECT_THROW(parse_series("1.0 2.0\n"), input_error);
  EXPECT_THROW(parse_series("inf\n"), input_error);
  EXPECT_THROW(parse_series("nan\n"), input_error);
}

TEST(ReadSeries, MissingAndShortFiles) {
  TempDir dir;
  EXPECT_THROW(read_series((dir.path() / "nope.txt").string()), input_error);
  write_lines(dir.path() / "short.txt", {1, 2, 3});
  EXPECT_THROW(read_series((dir.path() / "short.txt").string()), input_error);
}

TEST(Aggregate, PluralityVoteWithConditionalMeans) {
  std::vector<FitReport> reports(5);
  const Family fam[5] = {Family::t, Family::sas, Family::t, Family::gg, Family::t};
  for (int i = 0; i < 5; ++i) {
    reports[i].modal_family = fam[i];
    reports[i].alpha_hat = 1.0 + i;
    reports[i].gamma_hat = 2.0 * (1 + i);
  }
  const auto a = aggregate_reports(reports);
  EXPECT_EQ(a.family, Family::t);
  EXPECT_EQ(a.votes[0], 1u);
  EXPECT_EQ(a.votes[1], 1u);
  EXPECT_EQ(a.votes[2], 3u);
  EXPECT_NEAR(a.alpha_hat, (1.0 + 3.0 + 5.0) / 3.0, 1e-14);
  EXPECT_NEAR(a.gamma_hat, (2.0 + 6.0 + 10.0) / 3.0, 1e-14);
}

TEST(Fit, IndependentOfJobCount) {
  Rng rng(3);
  const auto data = sample({Family::t, 2.0, 1.0}, 300, rng);
  RunOptions opts;
  opts.config.n_iter = 400;
  opts.config.burn_in = 200;
  opts.chains = 4;
  opts.jobs = 1;
  const auto a = fit(data, opts);
  opts.jobs = 3;
  const auto b = fit(data, opts);
  EXPECT_EQ(dump(fit_report_json("x", data.size(), opts, a)),
            dump(fit_report_json("x", data.size(), opts, b)));
}

TEST(ConfigJson, RoundTripAndUnknownKeys) {
  SamplerConfig c;
  c.n_iter = 1234;
  c.alpha_max.t = 4.0;
  SamplerConfig d;
  apply_json(to_json(c), d);
  EXPECT_EQ(to_json(d).dump(), to_json(c).dump());
  EXPECT_THROW(apply_json(Json{{"bogus", 1}}, d), config_error);
  EXPECT_THROW(apply_json(Json{{"n_iter", "many"}}, d), config_error);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const auto p = dir.path();
  std::ofstream(p / "empty.txt").close();
  EXPECT_EQ(run_cli("fit " + (p / "empty.txt").string() + " --out-dir " + p.string()), 2);
  EXPECT_EQ(run_cli("fit " + (p / "missing.txt").string() + " --out-dir " + p.string()), 2);
  write_lines(p / "flat.txt", std::vector<double>(20, 1.0));
  EXPECT_EQ(run_cli("fit " + (p / "flat.txt").string() + " --out-dir " + p.string()), 3);
  write_lines(p / "ok.txt", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  {
    std::ofstream cfg(p / "bad.json");
    cfg << R"({"p_life": 0.9})";
  }
  EXPECT_EQ(run_cli("fit " + (p / "ok.txt").string() + " --config " + (p / "bad.json").string() +
                    " --out-dir " + p.string()),
            4);
  EXPECT_EQ(run_cli("fit " + (p / "ok.txt").string() + " --iters 10 --burn-in 20 --out-dir " +
                    p.string()),
            4);
  EXPECT_EQ(run_cli("synth sas 2.5 1 100 --out-dir " + p.string()), 4);
  EXPECT_EQ(run_cli("synth t 6 1 100 --out-dir " + p.string()), 4);
  EXPECT_EQ(run_cli("synth cauchy 1 1 100 --out-dir " + p.string()), 4);
  EXPECT_EQ(run_cli("diag " + (p / "ok.txt").string() + " gg -1 1 --out-dir " + p.string()), 4);
}

TEST(Cli, SynthWritesRequestedCountAndSidecar) {
  TempDir dir;
  const auto p = dir.path();
  ASSERT_EQ(run_cli("synth sas 1.5 2 1000 --seed 1 --output s.txt --out-dir " + p.string()), 0);
  const auto data = read_series((p / "s.txt").string());
  EXPECT_EQ(data.size(), 1000u);
  const auto meta = Json::parse(slurp(p / "s.txt.meta.json"));
  EXPECT_EQ(meta["spec"]["family"], "sas");
  EXPECT_EQ(meta["spec"]["alpha"], 1.5);
  EXPECT_EQ(meta["n"], 1000);
  EXPECT_EQ(meta["seed"], 1);
}

TEST(Cli, HeavyTailedSynthExceedsScale) {
  TempDir dir;
  int heavy = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    ASSERT_EQ(run_cli("synth t 0.6 3 1000 --seed " + std::to_string(seed) +
                      " --output t.txt --out-dir " + dir.path().string()),
              0);
    const auto data = read_series((dir.path() / "t.txt").string());
    double mx = 0.0;
    for (double x : data) mx = std::max(mx, std::fabs(x));
    heavy += mx > 100.0 * 3.0;
  }
  EXPECT_GE(heavy, 9);
}

TEST(Cli, FitIsByteDeterministicAndWritesPlotData) {
  TempDir dir;
  const auto p = dir.path();
  ASSERT_EQ(run_cli("synth gg 0.5 0.5 500 --seed 3 --output g.txt --out-dir " + p.string()), 0);
  const std::string base = "fit " + (p / "g.txt").string() + " --chains 3 --iters 600 --seed 9 ";
  ASSERT_EQ(run_cli(base + "--emit-traces --out-dir " + (p / "a").string()), 0);
  ASSERT_EQ(run_cli(base + "--jobs 2 --out-dir " + (p / "b").string()), 0);
  EXPECT_EQ(slurp(p / "a" / "report.json"), slurp(p / "b" / "report.json"));
  for (const char* f : {"pdf.csv", "cdf.csv", "histogram.csv", "qq.csv"}) {
    EXPECT_EQ(slurp(p / "a" / f), slurp(p / "b" / f)) << f;
  }
  const auto report = Json::parse(slurp(p / "a" / "report.json"));
  EXPECT_EQ(report["config"]["n_iter"], 600);
  EXPECT_EQ(report["config"]["burn_in"], 300);
  EXPECT_EQ(report["config"]["p_life"], 0.4);
  EXPECT_EQ(report["config"]["alpha_max"]["t"], 5.0);
  EXPECT_EQ(report["per_chain"].size(), 3u);
  const auto pdf = slurp(p / "a" / "pdf.csv");
  EXPECT_EQ(std::count(pdf.begin(), pdf.end(), '\n'), 513);
  EXPECT_TRUE(fs::exists(p / "a" / "traces" / "chain_002.csv"));
  EXPECT_FALSE(fs::exists(p / "b" / "traces"));
  const auto trace = slurp(p / "a" / "traces" / "chain_000.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 601);
  const auto manifest = Json::parse(slurp(p / "a" / "manifest.json"));
  EXPECT_TRUE(manifest.contains("started_utc"));
}

TEST(Cli, DiagBlocksAndPower) {
  TempDir dir;
  const auto p = dir.path();
  ASSERT_EQ(run_cli("synth sas 0.6 1 1000 --seed 4 --output s.txt --out-dir " + p.string()), 0);
  ASSERT_EQ(run_cli("diag " + (p / "s.txt").string() + " gg 2 1 --out-dir " + p.string()), 0);
  auto out = Json::parse(slurp(p / "diagnostics.json"));
  for (const char* block : {"kl", "ks", "histogram", "qq"}) EXPECT_TRUE(out.contains(block));
  EXPECT_LT(out["ks"]["p_value"].get<double>(), 0.01);
  ASSERT_EQ(run_cli("diag " + (p / "s.txt").string() + " sas 0.6 1 --out-dir " + p.string()), 0);
  out = Json::parse(slurp(p / "diagnostics.json"));
  EXPECT_GT(out["ks"]["p_value"].get<double>(), 0.05);
}

TEST(Cli, DiagReferenceStreamDiffersFromSynth) {
  TempDir dir;
  const auto p = dir.path();
  ASSERT_EQ(run_cli("synth gg 1.2 1 500 --seed 5 --output g.txt --out-dir " + p.string()), 0);
  ASSERT_EQ(run_cli("diag " + (p / "g.txt").string() + " gg 1.2 1 --seed 5 --out-dir " +
                    p.string()),
            0);
  const auto out = Json::parse(slurp(p / "diagnostics.json"));
  EXPECT_GT(out["ks"]["score"].get<double>(), 0.0);
}

TEST(Cli, StableRecoveryAtDeskScale) {
  TempDir dir;
  const auto p = dir.path();
  ASSERT_EQ(run_cli("synth sas 1.5 2 1000 --seed 1 --output synth_s15s2.txt --out-dir " +
                    p.string()),
            0);
  ASSERT_EQ(run_cli("fit " + (p / "synth_s15s2.txt").string() + " --chains 10 --seed 7 --out-dir " +
                    p.string()),
            0);
  const auto report = Json::parse(slurp(p / "report.json"));
  EXPECT_EQ(report["aggregate"]["family"], "sas");
  const double a = report["aggregate"]["alpha_hat"];
  EXPECT_GE(a, 1.28);
  EXPECT_LE(a, 1.68);
}
