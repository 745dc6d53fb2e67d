#ifndef RJFIT_DIAGNOSTICS_HPP_
#define RJFIT_DIAGNOSTICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rjfit/distributions.hpp"

namespace rjfit {

struct Histogram {
  std::vector<double> edges;  // bin_count + 1 strictly increasing values
  std::vector<double> mass;   // proportions, sum to 1

  std::size_t bins() const { return mass.size(); }
};

/// Equal-width histogram over [min, max] of the data. The last bin is closed.
inline Histogram histogram(std::span<const double> data, std::size_t bin_count = 100) {
  if (data.empty()) throw std::invalid_argument("histogram: empty data");
  if (bin_count < 2) throw std::invalid_argument("histogram: need at least 2 bins");
  const auto [lo_it, hi_it] = std::minmax_element(data.begin(), data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("histogram: zero-width data range");
  Histogram h;
  h.edges.resize(bin_count + 1);
  const double width = (hi - lo) / static_cast<double>(bin_count);
  for (std::size_t i = 0; i <= bin_count; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bin_count, 0);
  for (double x : data) {
    auto i = static_cast<std::size_t>((x - lo) / width);
    if (i >= bin_count) i = bin_count - 1;
    ++counts[i];
  }
  h.mass.resize(bin_count);
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < bin_count; ++i) {
    h.mass[i] = static_cast<double>(counts[i]) / n;
  }
  return h;
}

/// Model probability of each histogram bin from cdf differences, floored at
/// 1e-12 and renormalized over the histogram support.
inline std::vector<double> model_bin_mass(const Histogram& h, const DistSpec& spec) {
  if (h.edges.size() < 2) throw std::invalid_argument("model_bin_mass: need two edges");
  const std::size_t bins = h.edges.size() - 1;
  std::vector<double> g(bins);
  double prev = cdf(spec, h.edges.front());
  double total = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double next = cdf(spec, h.edges[i + 1]);
    g[i] = std::max(next - prev, 1e-12);
    total += g[i];
    prev = next;
  }
  for (double& v : g) v /= total;
  return g;
}

/// Discrete KL divergence sum p log(p / g) of the model from the histogram.
inline double kl_divergence(const Histogram& h, const DistSpec& spec) {
  if (h.bins() == 0 || h.edges.size() != h.bins() + 1) {
    throw std::invalid_argument("kl_divergence: malformed histogram");
  }
  const auto g = model_bin_mass(h, spec);
  double kl = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (h.mass[i] > 0.0) kl += h.mass[i] * std::log(h.mass[i] / g[i]);
  }
  return kl;
}

struct KsResult {
  double score = 0.0;
  double p_value = 1.0;
  double n_effective = 0.0;
};

/*
 * Asymptotic KS significance:
 *   t = d (N_e + 0.12 + 0.11 / N_e),  p = 2 sum_{i>=1} (-1)^(i-1) exp(-2 i^2 t^2)
 * For t < 0.2 the series is useless and p is 1 to any printed precision.
 */
inline double ks_p_value(double d, double n_effective) {
  if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("ks_p_value: d outside [0, 1]");
  if (!(n_effective > 0.0)) throw std::invalid_argument("ks_p_value: n_effective <= 0");
  const double t = d * (n_effective + 0.12 + 0.11 / n_effective);
  if (t < 0.2) return 1.0;
  const double a = -2.0 * t * t;
  double sum = 0.0;
  double sign = 1.0;
  for (int i = 1; i <= 10000; ++i) {
    const double term = std::exp(a * static_cast<double>(i) * static_cast<double>(i));
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Largest vertical distance between the empirical cdfs of two samples.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline KsResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  KsResult r;
  r.score = ks_statistic({x.begin(), x.end()}, {y.begin(), y.end()});
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  r.n_effective = std::sqrt(n * m / (n + m));
  r.p_value = ks_p_value(r.score, r.n_effective);
  return r;
}

/// Two-sample KS test of the data against m fresh draws from spec.
template <class Rng>
KsResult ks_two_sample(std::span<const double> data, const DistSpec& spec,
                       std::size_t m, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("ks_two_sample: empty data");
  const auto reference = sample(spec, m, rng);
  return ks_two_sample(data, reference);
}

/// Sorted data paired with sorted draws from spec (m = data size).
template <class Rng>
std::vector<std::pair<double, double>> qq_points(std::span<const double> data,
                                                 const DistSpec& spec, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("qq_points: empty data");
  std::vector<double> x(data.begin(), data.end());
  auto y = sample(spec, x.size(), rng);
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<std::pair<double, double>> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = {x[i], y[i]};
  return out;
}

}  // namespace rjfit

#endif  // RJFIT_DIAGNOSTICS_HPP_
