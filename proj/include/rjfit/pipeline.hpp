#ifndef RJFIT_PIPELINE_HPP_
#define RJFIT_PIPELINE_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

#include "rjfit/diagnostics.hpp"
#include "rjfit/distributions.hpp"
#include "rjfit/errors.hpp"
#include "rjfit/rng.hpp"
#include "rjfit/sampler.hpp"

namespace rjfit {

inline constexpr std::size_t min_input_points = 10;

/// Parses one real per line. Blank lines and lines starting with '#' are
/// skipped. Throws input_error on malformed or non-finite values.
inline std::vector<double> parse_series(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    line = line.substr(first);
    line = line.substr(0, line.find_last_not_of(" \t\r") + 1);
    if (line.front() == '#') continue;
    if (line.front() == '+') line.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc{} || ptr != line.data() + line.size() || !std::isfinite(value)) {
      throw input_error("line " + std::to_string(line_no) + ": not a finite real: '" +
                        std::string(line) + "'");
    }
    out.push_back(value);
  }
  return out;
}

inline std::vector<double> read_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open input file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto data = parse_series(text);
  if (data.size() < min_input_points) {
    throw input_error(path + ": need at least " + std::to_string(min_input_points) +
                      " values, found " + std::to_string(data.size()));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Diagnostics bundle for one fitted member.

struct DiagnosticsBundle {
  Histogram hist;
  double kl = 0.0;
  KsResult ks;
  std::vector<std::pair<double, double>> qq;
};

/// KL against a data histogram, two-sample KS with m = n and Q-Q pairs.
/// Reference draws come from a stream seeded by `seed`.
inline DiagnosticsBundle diagnose(std::span<const double> data, const DistSpec& spec,
                                  std::uint64_t seed, std::size_t bins = 100) {
  DiagnosticsBundle d;
  Rng rng(seed);
  d.hist = histogram(data, bins);
  d.kl = kl_divergence(d.hist, spec);
  d.ks = ks_two_sample(data, spec, data.size(), rng);
  d.qq = qq_points(data, spec, rng);
  return d;
}

// ---------------------------------------------------------------------------
// Multi-chain fit.

struct RunOptions {
  SamplerConfig config;
  std::size_t chains = 40;
  unsigned jobs = 1;
  std::size_t hist_bins = 100;
  bool keep_traces = false;
};

inline void validate(const RunOptions& o) {
  validate(o.config);
  if (o.chains < 1) throw config_error("chains must be at least 1");
  if (o.jobs < 1) throw config_error("jobs must be at least 1");
  if (o.hist_bins < 2) throw config_error("histogram bins must be at least 2");
}

struct Aggregate {
  Family family = Family::gg;
  std::array<std::size_t, 3> votes{};  // chains whose modal family is each family
  double alpha_hat = 0.0;               // mean over chains voting for `family`
  double gamma_hat = 0.0;
  double alpha_sd = 0.0;                // spread of those per-chain estimates
  double gamma_sd = 0.0;
  GoodnessOfFit diagnostics;

  DistSpec spec() const { return DistSpec{family, alpha_hat, gamma_hat, 0.0}; }
};

struct FitRun {
  std::vector<FitReport> chains;
  std::vector<ChainTrace> traces;  // empty unless keep_traces
  Aggregate aggregate;
};

/// Seed of chain i; the aggregate diagnostics use stream index `chains`.
inline std::uint64_t chain_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, index);
}

/// Plurality vote over the chains' modal families (ties to the lower family
/// code) with alpha/gamma averaged over the chains in the winning family.
inline Aggregate aggregate_reports(std::span<const FitReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_reports: no chains");
  Aggregate a;
  for (const auto& r : reports) ++a.votes[family_index(r.modal_family)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (a.votes[i] > a.votes[best]) best = i;
  }
  a.family = all_families[best];
  double sa = 0.0, sg = 0.0, saa = 0.0, sgg = 0.0;
  for (const auto& r : reports) {
    if (r.modal_family != a.family) continue;
    sa += r.alpha_hat;
    sg += r.gamma_hat;
    saa += r.alpha_hat * r.alpha_hat;
    sgg += r.gamma_hat * r.gamma_hat;
  }
  const double n = static_cast<double>(a.votes[best]);
  a.alpha_hat = sa / n;
  a.gamma_hat = sg / n;
  a.alpha_sd = std::sqrt(std::max(0.0, saa / n - a.alpha_hat * a.alpha_hat));
  a.gamma_sd = std::sqrt(std::max(0.0, sgg / n - a.gamma_hat * a.gamma_hat));
  return a;
}

inline GoodnessOfFit goodness_of_fit(const DiagnosticsBundle& d) {
  return GoodnessOfFit{d.kl, d.ks.score, d.ks.p_value};
}

/// Runs the chains (concurrently up to opts.jobs) and reduces them by chain
/// index, so the result does not depend on scheduling.
inline FitRun fit(std::span<const double> data, const RunOptions& opts) {
  validate(opts);
  if (data.empty()) throw input_error("no data");
  (void)initial_gamma(data);  // degenerate data fails before any chain starts
  const DataLikelihood likelihood(std::vector<double>(data.begin(), data.end()));
  const ModelState start = initial_state(data, opts.config, likelihood);

  FitRun run;
  run.chains.resize(opts.chains);
  if (opts.keep_traces) run.traces.resize(opts.chains);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t i = next++; i < opts.chains; i = next++) {
      try {
        SamplerConfig cfg = opts.config;
        cfg.seed = chain_seed(opts.config.seed, i);
        Rng rng(cfg.seed);
        auto trace = run_chain(likelihood, start, cfg, rng);
        FitReport report = summarize(trace, cfg);
        report.diagnostics = goodness_of_fit(
            diagnose(data, report.spec(), derive_seed(cfg.seed, 1), opts.hist_bins));
        run.chains[i] = std::move(report);
        if (opts.keep_traces) run.traces[i] = std::move(trace);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(opts.jobs, opts.chains));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  run.aggregate = aggregate_reports(run.chains);
  run.aggregate.diagnostics =
      goodness_of_fit(diagnose(data, run.aggregate.spec(),
                               chain_seed(opts.config.seed, opts.chains), opts.hist_bins));
  return run;
}

}  // namespace rjfit

#endif  // RJFIT_PIPELINE_HPP_
