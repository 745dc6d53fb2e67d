#ifndef RJFIT_DISTRIBUTIONS_HPP_
#define RJFIT_DISTRIBUTIONS_HPP_

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rjfit/errors.hpp"
#include "rjfit/family.hpp"
#include "rjfit/special_functions.hpp"
#include "rjfit/stable_density.hpp"

namespace rjfit {

/*
 * One member of the three candidate families, centred at the origin.
 *
 *   SαS: characteristic function exp(-gamma |t|^alpha), 0 < alpha <= 2
 *   GG:  alpha / (2 gamma Gamma(1/alpha)) exp(-(|x|/gamma)^alpha)
 *   t:   Gamma((alpha+1)/2) / (Gamma(alpha/2) gamma sqrt(pi alpha))
 *          * (1 + (x/gamma)^2 / alpha)^(-(alpha+1)/2)
 *
 * Note that gamma is a dispersion for SαS (the scale is gamma^(1/alpha))
 * and a plain scale for GG and t.
 */
struct DistSpec {
  Family family = Family::gg;
  double alpha = 2.0;
  double gamma = 1.0;
  double delta = 0.0;

  friend bool operator==(const DistSpec&, const DistSpec&) = default;
};

/// Upper shape bounds per family used by the sampler and the CLI.
struct ShapeBounds {
  double sas = 2.0;
  double gg = 2.0;
  double t = 5.0;

  double operator[](Family f) const {
    switch (f) {
      case Family::sas:
        return sas;
      case Family::gg:
        return gg;
      case Family::t:
        return t;
    }
    return 0.0;
  }
};

inline std::string describe(const DistSpec& s) {
  return std::string(family_name(s.family)) + "(alpha=" +
         std::to_string(s.alpha) + ", gamma=" + std::to_string(s.gamma) + ")";
}

/// Throws std::invalid_argument unless the DistSpec is a member of its family.
inline void validate(const DistSpec& s) {
  if (!(std::isfinite(s.alpha) && s.alpha > 0.0)) {
    throw std::invalid_argument("shape alpha must be positive and finite: " +
                                describe(s));
  }
  if (s.family == Family::sas && s.alpha > 2.0) {
    throw std::invalid_argument("SaS shape must not exceed 2: " + describe(s));
  }
  if (!(std::isfinite(s.gamma) && s.gamma > 0.0)) {
    throw std::invalid_argument("scale gamma must be positive and finite: " +
                                describe(s));
  }
  if (s.delta != 0.0) {
    throw std::invalid_argument("location must be 0: " + describe(s));
  }
}

/// As validate(), additionally enforcing the configured shape bounds.
inline void validate(const DistSpec& s, const ShapeBounds& bounds) {
  validate(s);
  if (s.alpha > bounds[s.family]) {
    throw std::invalid_argument("shape exceeds the family bound " +
                                std::to_string(bounds[s.family]) + ": " +
                                describe(s));
  }
}

inline DistSpec make_spec(Family family, double alpha, double gamma) {
  DistSpec s{family, alpha, gamma, 0.0};
  validate(s);
  return s;
}

/*
 * Log-density evaluator with per-spec constants hoisted out of the loop.
 * For SαS it holds a shared handle to the standardized table, so copies are
 * cheap and evaluation is thread-safe.
 */
class LogDensity {
 public:
  explicit LogDensity(const DistSpec& spec) : spec_(spec) {
    validate(spec);
    const double a = spec.alpha;
    const double g = spec.gamma;
    switch (spec.family) {
      case Family::sas:
        log_scale_ = std::log(g) / a;
        if (a == 2.0) {
          // Normal with variance 2 after standardization.
          constant_ = -0.5 * std::log(4.0 * std::numbers::pi) - log_scale_;
        } else {
          table_ = stable::table_cache().get(a);
          constant_ = -log_scale_;
        }
        break;
      case Family::gg:
        constant_ = std::log(a) - std::log(2.0 * g) - log_abs_gamma(1.0 / a);
        break;
      case Family::t:
        constant_ = log_abs_gamma(0.5 * (a + 1.0)) - log_abs_gamma(0.5 * a) -
                    std::log(g) - 0.5 * std::log(std::numbers::pi * a);
        break;
    }
  }

  const DistSpec& spec() const { return spec_; }

  double operator()(double x) const {
    if (!std::isfinite(x)) {
      throw std::domain_error("log_pdf: non-finite argument");
    }
    const double a = spec_.alpha;
    switch (spec_.family) {
      case Family::sas: {
        if (!table_) {
          const double u = x / std::exp(log_scale_);
          return constant_ - 0.25 * u * u;
        }
        const double ax = std::fabs(x);
        if (ax == 0.0) return constant_ + table_->log_density(0.0);
        return constant_ + table_->log_density_log_abs(std::log(ax) - log_scale_);
      }
      case Family::gg:
        return constant_ - std::pow(std::fabs(x) / spec_.gamma, a);
      case Family::t: {
        const double u = x / spec_.gamma;
        return constant_ - 0.5 * (a + 1.0) * std::log1p(u * u / a);
      }
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  DistSpec spec_;
  double constant_ = 0.0;
  double log_scale_ = 0.0;
  std::shared_ptr<const stable::SasPdfTable> table_;
};

inline double log_pdf(const DistSpec& spec, double x) {
  return LogDensity(spec)(x);
}

inline double log_likelihood(const DistSpec& spec, std::span<const double> data) {
  if (data.empty()) {
    throw std::invalid_argument("log_likelihood: empty data");
  }
  const LogDensity density(spec);
  double sum = 0.0;
  for (double x : data) sum += density(x);
  return sum;
}

inline double cdf(const DistSpec& spec, double x) {
  validate(spec);
  if (std::isnan(x)) throw std::domain_error("cdf: NaN argument");
  if (x == 0.0) return 0.5;
  const double a = spec.alpha;
  const double ax = std::fabs(x);
  double tail = 0.0;  // P(X > |x|)
  switch (spec.family) {
    case Family::sas:
      if (std::isinf(x)) {
        tail = 0.0;
      } else {
        tail = stable::upper_tail(a, ax / std::pow(spec.gamma, 1.0 / a));
      }
      break;
    case Family::gg:
      tail = 0.5 * boost::math::gamma_q(1.0 / a, std::pow(ax / spec.gamma, a));
      break;
    case Family::t: {
      const double u = ax / spec.gamma;
      tail = 0.5 * boost::math::ibeta(0.5 * a, 0.5, a / (a + u * u));
      break;
    }
  }
  return x > 0.0 ? 1.0 - tail : tail;
}

namespace detail {

template <class Rng>
double standard_sas_variate(double alpha, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> exponential(1.0);
  double u;
  do {
    u = uniform(rng);
  } while (u == 0.0);
  const double v = std::numbers::pi * (u - 0.5);
  const double w = exponential(rng);
  if (alpha == 1.0) return std::tan(v);
  // Chambers-Mallows-Stuck, symmetric case; assembled in logs so that very
  // small alpha saturates at the largest finite double instead of inf.
  const double s = std::sin(alpha * v);
  if (s == 0.0) return 0.0;
  const double log_abs = std::log(std::fabs(s)) - std::log(std::cos(v)) / alpha +
                         (1.0 - alpha) / alpha *
                             (std::log(std::cos((1.0 - alpha) * v)) - std::log(w));
  const double mag =
      std::exp(std::min(log_abs, std::log(std::numeric_limits<double>::max())));
  return s > 0.0 ? mag : -mag;
}

}  // namespace detail

/// n i.i.d. draws from spec.
template <class Rng>
std::vector<double> sample(const DistSpec& spec, std::size_t n, Rng& rng) {
  validate(spec);
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  std::vector<double> out(n);
  const double a = spec.alpha;
  const double g = spec.gamma;
  switch (spec.family) {
    case Family::sas: {
      const double scale = std::pow(g, 1.0 / a);
      for (auto& x : out) x = scale * detail::standard_sas_variate(a, rng);
      break;
    }
    case Family::gg: {
      std::gamma_distribution<double> gamma_variate(1.0 / a, 1.0);
      std::bernoulli_distribution coin(0.5);
      for (auto& x : out) {
        const double mag = g * std::pow(gamma_variate(rng), 1.0 / a);
        x = coin(rng) ? mag : -mag;
      }
      break;
    }
    case Family::t: {
      std::normal_distribution<double> normal(0.0, 1.0);
      std::chi_squared_distribution<double> chi2(a);
      for (auto& x : out) {
        const double z = normal(rng);
        x = g * z / std::sqrt(chi2(rng) / a);
      }
      break;
    }
  }
  return out;
}

/*
 * Absolute fractional lower-order moment constants, E|X|^p at unit scale:
 *
 *   C_SaS(p, a) = 2^(p+1) Gamma((p+1)/2) Gamma(-p/a) / (a sqrt(pi) Gamma(-p/2))
 *   C_GG(p, a)  = Gamma((p+1)/a) / Gamma(1/a)
 *   C_t(p, a)   = Gamma((p+1)/2) Gamma((a-p)/2) / (sqrt(pi) Gamma(a/2)) a^(p/2)
 *
 * Both SαS Gammas are evaluated at negative arguments, hence the reflection
 * formula in log_abs_gamma.
 */
inline double log_flom_constant(Family family, double p, double alpha) {
  if (!(std::isfinite(p) && p > 0.0)) {
    throw std::invalid_argument("FLOM order p must be positive");
  }
  if (!(std::isfinite(alpha) && alpha > 0.0)) {
    throw std::invalid_argument("FLOM shape must be positive");
  }
  const double half_log_pi = 0.5 * std::log(std::numbers::pi);
  switch (family) {
    case Family::sas: {
      if (alpha > 2.0) throw std::invalid_argument("SaS shape exceeds 2");
      if (p >= alpha) {
        throw moment_undefined_error("SaS moment of order p >= alpha");
      }
      const double u = -p / alpha;
      const double w = -p / 2.0;
      if (is_gamma_pole(u) || is_gamma_pole(w)) {
        throw moment_undefined_error("SaS FLOM constant at a gamma pole");
      }
      if (gamma_sign(u) * gamma_sign(w) < 0) {
        throw moment_undefined_error("SaS FLOM constant is not positive");
      }
      return (p + 1.0) * std::log(2.0) + log_abs_gamma(0.5 * (p + 1.0)) +
             log_abs_gamma(u) - std::log(alpha) - half_log_pi -
             log_abs_gamma(w);
    }
    case Family::gg:
      return log_abs_gamma((p + 1.0) / alpha) - log_abs_gamma(1.0 / alpha);
    case Family::t:
      if (p >= alpha) {
        throw moment_undefined_error("t moment of order p >= alpha");
      }
      return log_abs_gamma(0.5 * (p + 1.0)) + log_abs_gamma(0.5 * (alpha - p)) -
             half_log_pi - log_abs_gamma(0.5 * alpha) + 0.5 * p * std::log(alpha);
  }
  throw std::invalid_argument("unknown family");
}

inline double flom_constant(Family family, double p, double alpha) {
  return std::exp(log_flom_constant(family, p, alpha));
}

/// Exponent of the scale parameter in E|X|^p: p/alpha for SαS, p otherwise.
inline double flom_scale_exponent(Family family, double p, double alpha) {
  return family == Family::sas ? p / alpha : p;
}

inline double log_flom_value(const DistSpec& spec, double p) {
  validate(spec);
  return log_flom_constant(spec.family, p, spec.alpha) +
         flom_scale_exponent(spec.family, p, spec.alpha) * std::log(spec.gamma);
}

/// E|X|^p for the given member.
inline double flom_value(const DistSpec& spec, double p) {
  return std::exp(log_flom_value(spec, p));
}

}  // namespace rjfit

#endif  // RJFIT_DISTRIBUTIONS_HPP_
