#ifndef RJFIT_STABLE_DENSITY_HPP_
#define RJFIT_STABLE_DENSITY_HPP_

// Symmetric alpha-stable density and CDF for the characteristic function
// exp(-|t|^alpha) (dispersion 1, location 0).
//
// There is no closed form apart from alpha = 1 (Cauchy) and alpha = 2
// (Normal with variance 2). Values are obtained from the Zolotarev integral
// representation (in Nolan's form, with beta = 0 so theta_0 = 0):
//
//   f(x)     = alpha / (pi |alpha - 1| x) * Int_0^{pi/2} z e^{-z} dtheta
//   1 - F(x) = 1/pi Int_0^{pi/2} e^{-z} dtheta            (alpha > 1)
//   1 - F(x) = 1/pi Int_0^{pi/2} (1 - e^{-z}) dtheta      (alpha < 1)
//
//   z(theta) = x^{alpha/(alpha-1)} V(theta),
//   V(theta) = (cos theta / sin(alpha theta))^{alpha/(alpha-1)}
//              * cos((alpha-1) theta) / cos theta
//
// for x > 0. z is monotone in theta, so every integrand is unimodal or
// monotone; the quadrature splits at the point where z = 1 and walks
// outward on geometrically growing pieces.
//
// Likelihood evaluation goes through SasPdfTable, which tabulates log f on
// a uniform grid in log|x| and falls back to the two convergent/asymptotic
// series outside it:
//
//   near 0:  f(x) = 1/(pi alpha) sum_k (-1)^k Gamma((2k+1)/alpha)/(2k)! x^{2k}
//   tails:   f(x) = 1/pi sum_k (-1)^{k+1} Gamma(k alpha+1)/k!
//                     sin(k pi alpha/2) x^{-(k alpha+1)}

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rjfit/quadrature.hpp"
#include "rjfit/special_functions.hpp"

namespace rjfit::stable {

namespace detail {

inline constexpr double half_pi = std::numbers::pi / 2.0;
inline constexpr double quarter_pi = std::numbers::pi / 4.0;
inline constexpr double tiny_angle = 1e-280;

// log z as a function of the integration angle. The lower half uses theta
// directly; the upper half uses phi = pi/2 - theta so that cos(theta) and
// sin(alpha theta) keep full relative precision near pi/2.
class zolotarev_log_z {
 public:
  zolotarev_log_z(double alpha, double log_x)
      : alpha_(alpha),
        zeta_(alpha / (alpha - 1.0)),
        zeta_log_x_(alpha / (alpha - 1.0) * log_x) {}

  double lower(double theta) const {
    const double log_cos = std::log(std::cos(theta));
    return zeta_log_x_ + (zeta_ - 1.0) * log_cos -
           zeta_ * std::log(std::sin(alpha_ * theta)) +
           std::log(std::cos((alpha_ - 1.0) * theta));
  }

  double upper(double phi) const {
    const double log_cos = std::log(std::sin(phi));
    const double base = (2.0 - alpha_) * half_pi;
    return zeta_log_x_ + (zeta_ - 1.0) * log_cos -
           zeta_ * std::log(std::sin(base + alpha_ * phi)) +
           std::log(std::sin(base + (alpha_ - 1.0) * phi));
  }

 private:
  double alpha_;
  double zeta_;
  double zeta_log_x_;
};

inline double density_kernel(double log_z) {
  if (log_z > 700.0) return 0.0;
  return std::exp(log_z - std::exp(log_z));
}

inline double survival_kernel(double log_z) {  // e^{-z}
  if (log_z > 700.0) return 0.0;
  return std::exp(-std::exp(log_z));
}

inline double complement_kernel(double log_z) {  // 1 - e^{-z}
  if (log_z > 700.0) return 1.0;
  return -std::expm1(-std::exp(log_z));
}

inline double integrate_piece(const auto& f, double a, double b) {
  return quadrature::integrate(f, a, b, 1e-13);
}

// Integral over v in (0, pi/4] of kernel(log_z(v)), where log_z is monotone.
template <class LogZ, class Kernel>
double integrate_half(const LogZ& log_z, const Kernel& kernel) {
  constexpr double end = quarter_pi;
  const auto integrand = [&](double v) { return kernel(log_z(v)); };

  const double g_small = log_z(tiny_angle);
  const double g_end = log_z(end);
  const bool has_root = (g_small > 0.0) != (g_end > 0.0);

  double center = end;
  double width = end;
  if (has_root) {
    double lo = std::log(tiny_angle);
    double hi = std::log(end);
    const bool increasing = g_end > g_small;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo));
         ++i) {
      const double mid = 0.5 * (lo + hi);
      const double g = log_z(std::exp(mid));
      if ((g > 0.0) == increasing) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    center = std::exp(0.5 * (lo + hi));
    const double step = 1e-4 * center;
    const double slope =
        (log_z(std::min(center + step, end)) - log_z(center - step)) /
        (std::min(center + step, end) - (center - step));
    width = 1.0 / std::max(std::fabs(slope), 1e-300);
  }

  double total = 0.0;
  const auto negligible = [&](double piece, double outer, double remaining) {
    const double bound = integrand(outer) * remaining;
    return std::fabs(piece) <= 1e-17 * std::fabs(total) &&
           bound <= 1e-17 * std::fabs(total);
  };

  // Outward toward pi/4.
  if (center < end) {
    double a = center;
    for (double k = 1.0;; k *= 4.0) {
      const double b = std::min(center + width * k, end);
      const double piece = integrate_piece(integrand, a, b);
      total += piece;
      if (b >= end) break;
      if (negligible(piece, b, end - b)) break;
      a = b;
    }
  }

  // Outward toward 0: first linear steps around the peak, then geometric.
  double b = center;
  double k = 1.0;
  while (true) {
    double a;
    if (has_root && center - width * k > 0.25 * center) {
      a = center - width * k;
      k *= 4.0;
    } else {
      a = 0.25 * b;
    }
    if (a < 1e-250) {
      total += integrate_piece(integrand, 0.0, b);
      break;
    }
    const double piece = integrate_piece(integrand, a, b);
    total += piece;
    if (negligible(piece, a, a)) break;
    b = a;
  }
  return total;
}

}  // namespace detail

/// Standardized SαS density at x via the integral representation.
/// Slow (quadrature per call); intended for table construction and checks.
inline double log_density_direct(double alpha, double x) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("stable: alpha must lie in (0, 2]");
  }
  const double ax = std::fabs(x);
  if (alpha == 1.0) {
    return -std::log(std::numbers::pi) - std::log1p(ax * ax);
  }
  if (ax == 0.0) {
    return log_abs_gamma(1.0 + 1.0 / alpha) - std::log(std::numbers::pi);
  }
  const double log_x = std::log(ax);
  const detail::zolotarev_log_z lz(alpha, log_x);
  const double integral =
      detail::integrate_half([&](double t) { return lz.lower(t); },
                             detail::density_kernel) +
      detail::integrate_half([&](double p) { return lz.upper(p); },
                             detail::density_kernel);
  return std::log(alpha / (std::numbers::pi * std::fabs(alpha - 1.0))) -
         log_x + std::log(integral);
}

/// Standardized upper tail probability P(X > x) for x >= 0.
inline double upper_tail(double alpha, double x) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("stable: alpha must lie in (0, 2]");
  }
  if (x < 0.0) return 1.0 - upper_tail(alpha, -x);
  if (x == 0.0) return 0.5;
  if (alpha == 1.0) {
    return std::atan2(1.0, x) / std::numbers::pi;
  }
  if (alpha == 2.0) {
    return 0.5 * std::erfc(x / 2.0);
  }
  const detail::zolotarev_log_z lz(alpha, std::log(x));
  const auto lower = [&](double t) { return lz.lower(t); };
  const auto upper = [&](double p) { return lz.upper(p); };
  double integral;
  if (alpha > 1.0) {
    integral = detail::integrate_half(lower, detail::survival_kernel) +
               detail::integrate_half(upper, detail::survival_kernel);
  } else {
    integral = detail::integrate_half(lower, detail::complement_kernel) +
               detail::integrate_half(upper, detail::complement_kernel);
  }
  return std::clamp(integral / std::numbers::pi, 0.0, 0.5);
}

/// Standardized CDF.
inline double cdf_standard(double alpha, double x) {
  if (x >= 0.0) return 1.0 - upper_tail(alpha, x);
  return upper_tail(alpha, -x);
}

/*
 * Tabulated standardized log-density for one alpha.
 *
 * The table stores log f at uniformly spaced v = log|x| between the small-x
 * cutoff and the tail cutoff, where the respective series reach double
 * precision. Interpolation is six-point Lagrange in v.
 */
class SasPdfTable {
 public:
  explicit SasPdfTable(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
      throw std::invalid_argument(
          "SasPdfTable: alpha must lie in (0, 2); alpha = 2 is Gaussian");
    }
    init_small_series();
    init_tail_series();
    build();
  }

  double alpha() const { return alpha_; }

  /// Cutoffs in |x|: below small_cutoff the expansion at 0 is used, above
  /// tail_cutoff the tail series.
  double small_cutoff() const { return std::exp(v_lo_); }
  double tail_cutoff() const { return std::exp(v_hi_); }

  double step() const { return h_; }

  /// |x| abscissae of the stored nodes (ascending).
  std::vector<double> x_grid() const {
    std::vector<double> xs(log_density_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = std::exp(v0_ + static_cast<double>(i) * h_);
    }
    return xs;
  }

  const std::vector<double>& log_density() const { return log_density_; }

  double log_density(double x) const {
    const double ax = std::fabs(x);
    if (ax == 0.0) return log_f0_;
    return log_density_log_abs(std::log(ax));
  }

  /// log f at |x| = exp(v). Accepts any finite v (and -inf for x = 0).
  double log_density_log_abs(double v) const {
    if (v < v_lo_) return small_series(v);
    if (v > v_hi_) return tail_series(v);
    return interpolate(v);
  }

  /// log f evaluated by the expansion at 0 (accurate for v <= log small_cutoff).
  double small_series(double v) const {
    if (v == -std::numeric_limits<double>::infinity()) return log_f0_;
    const double x2 = std::exp(2.0 * v);
    return log_f0_ + std::log1p(-small_c1_ * x2 + small_c2_ * x2 * x2);
  }

  /// log f from the tail series (accurate for v >= log tail_cutoff).
  double tail_series(double v) const {
    double sum = 0.0;
    evaluate_tail(v, sum);
    return log_b1_over_pi_ - (alpha_ + 1.0) * v + std::log(sum);
  }

  /// Probability mass of |X| > tail_cutoff from term-wise integration of
  /// the tail series.
  double tail_mass_beyond_cutoff() const {
    double mass = 0.0;
    for (std::size_t k = 0; k < tail_log_ratio_.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      const double term = tail_sign_[k] *
                          std::exp(tail_log_ratio_[k] + log_b1_over_pi_ -
                                   kk * alpha_ * v_hi_) /
                          (kk * alpha_);
      mass += term;
      if (std::fabs(term) < 1e-18 * std::fabs(mass)) break;
    }
    return 2.0 * mass;
  }

  /// Probability mass of |X| < small_cutoff.
  double central_mass_below_cutoff() const {
    const double x = small_cutoff();
    const double x2 = x * x;
    return 2.0 * std::exp(log_f0_) * x *
           (1.0 - small_c1_ * x2 / 3.0 + small_c2_ * x2 * x2 / 5.0);
  }

 private:
  static constexpr std::size_t stencil = 6;
  static constexpr std::size_t max_tail_terms = 60;

  void init_small_series() {
    log_f0_ = log_abs_gamma(1.0 + 1.0 / alpha_) - std::log(std::numbers::pi);
    const double lg0 = log_abs_gamma(1.0 / alpha_);
    const double l1 = log_abs_gamma(3.0 / alpha_) - std::log(2.0) - lg0;
    const double l2 = log_abs_gamma(5.0 / alpha_) - std::log(24.0) - lg0;
    const double l3 = log_abs_gamma(7.0 / alpha_) - std::log(720.0) - lg0;
    small_c1_ = std::exp(l1);
    small_c2_ = std::exp(l2);
    // Truncation after the x^4 term: next relative term below 1e-17, and the
    // correction itself small enough for log1p to stay well conditioned.
    const double v_trunc = (std::log(1e-17) - l3) / 6.0;
    const double v_small = 0.5 * (std::log(0.1) - l1);
    v_lo_ = std::min(v_trunc, v_small);
  }

  void init_tail_series() {
    const double log_gamma1 = log_abs_gamma(alpha_ + 1.0);
    const double sin1 = std::sin(std::numbers::pi * alpha_ / 2.0);
    log_b1_over_pi_ = log_gamma1 + std::log(sin1) - std::log(std::numbers::pi);
    tail_log_ratio_.resize(max_tail_terms);
    tail_log_envelope_.resize(max_tail_terms);
    tail_sign_.resize(max_tail_terms);
    for (std::size_t i = 0; i < max_tail_terms; ++i) {
      const double k = static_cast<double>(i + 1);
      const double s = std::sin(k * std::numbers::pi * alpha_ / 2.0);
      const double env = log_abs_gamma(k * alpha_ + 1.0) -
                         log_abs_gamma(k + 1.0) - log_gamma1 - std::log(sin1);
      tail_log_envelope_[i] = env;
      tail_log_ratio_[i] =
          std::fabs(s) > 0.0 ? env + std::log(std::fabs(s))
                             : -std::numeric_limits<double>::infinity();
      const double parity = (i % 2 == 0) ? 1.0 : -1.0;
      tail_sign_[i] = parity * (s >= 0.0 ? 1.0 : -1.0);
    }
    // Scan outward for the first log|x| where the series is safely usable.
    double v = v_lo_;
    int good_run = 0;
    double first_good = v;
    for (; v < 800.0; v += 0.25) {
      double sum = 0.0;
      if (evaluate_tail(v, sum)) {
        if (good_run == 0) first_good = v;
        if (++good_run == 4) break;
      } else {
        good_run = 0;
      }
    }
    if (good_run < 4) {
      throw std::runtime_error("SasPdfTable: tail series never converged");
    }
    v_hi_ = std::max(first_good, v_lo_ + 1.0);
  }

  // Sums the normalized tail series at v into `sum`. Returns true when the
  // sum converged to double precision without significant cancellation.
  bool evaluate_tail(double v, double& sum) const {
    sum = 0.0;
    double largest = 0.0;
    double previous_envelope = std::numeric_limits<double>::infinity();
    const bool asymptotic = alpha_ > 1.0;
    for (std::size_t i = 0; i < max_tail_terms; ++i) {
      const double decay = -static_cast<double>(i) * alpha_ * v;
      const double envelope = std::exp(tail_log_envelope_[i] + decay);
      const double term = tail_sign_[i] * std::exp(tail_log_ratio_[i] + decay);
      sum += term;
      largest = std::max(largest, std::fabs(term));
      if (i > 0 && envelope < 1e-17 * std::fabs(sum)) {
        return sum > 0.25 && largest < 4.0;
      }
      if (asymptotic && envelope > previous_envelope) {
        return false;
      }
      previous_envelope = envelope;
    }
    return false;
  }

  void build() {
    h_ = alpha_ >= 1.0 ? 0.01 : std::min(0.2, 0.01 / alpha_);
    const double pad = static_cast<double>(stencil) * h_;
    v0_ = v_lo_ - pad;
    const auto n = static_cast<std::size_t>(
                       std::ceil((v_hi_ + pad - v0_) / h_)) + 1;
    log_density_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = v0_ + static_cast<double>(i) * h_;
      log_density_[i] = node_value(v);
    }
  }

  double node_value(double v) const {
    if (alpha_ == 1.0) {
      const double x = std::exp(v);
      return -std::log(std::numbers::pi) - std::log1p(x * x);
    }
    return log_density_direct(alpha_, std::exp(v));
  }

  double interpolate(double v) const {
    const double s = (v - v0_) / h_;
    auto first = static_cast<std::ptrdiff_t>(std::floor(s)) - 2;
    const auto last_start =
        static_cast<std::ptrdiff_t>(log_density_.size() - stencil);
    first = std::clamp<std::ptrdiff_t>(first, 0, last_start);
    const double t = s - static_cast<double>(first);
    double result = 0.0;
    for (std::size_t j = 0; j < stencil; ++j) {
      double w = 1.0;
      for (std::size_t m = 0; m < stencil; ++m) {
        if (m == j) continue;
        w *= (t - static_cast<double>(m)) /
             (static_cast<double>(j) - static_cast<double>(m));
      }
      result += w * log_density_[static_cast<std::size_t>(first) + j];
    }
    return result;
  }

  double alpha_;
  double h_ = 0.02;
  double v0_ = 0.0;
  double v_lo_ = 0.0;
  double v_hi_ = 0.0;
  double log_f0_ = 0.0;
  double small_c1_ = 0.0;
  double small_c2_ = 0.0;
  double log_b1_over_pi_ = 0.0;
  std::vector<double> tail_log_ratio_;
  std::vector<double> tail_log_envelope_;
  std::vector<double> tail_sign_;
  std::vector<double> log_density_;
};

/// Process-wide cache of tables keyed by alpha. Construction of a given
/// table happens once; lookups are safe from any thread.
class TableCache {
 public:
  std::shared_ptr<const SasPdfTable> get(double alpha) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto& slot = entries_[alpha];
      if (!slot) slot = std::make_shared<Entry>();
      entry = slot;
    }
    std::call_once(entry->once, [&] {
      entry->table = std::make_shared<const SasPdfTable>(alpha);
    });
    return entry->table;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  struct Entry {
    std::once_flag once;
    std::shared_ptr<const SasPdfTable> table;
  };
  mutable std::mutex mutex_;
  std::map<double, std::shared_ptr<Entry>> entries_;
};

inline TableCache& table_cache() {
  static TableCache cache;
  return cache;
}

}  // namespace rjfit::stable

#endif  // RJFIT_STABLE_DENSITY_HPP_
