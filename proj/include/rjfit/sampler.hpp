#ifndef RJFIT_SAMPLER_HPP_
#define RJFIT_SAMPLER_HPP_

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rjfit/distributions.hpp"
#include "rjfit/errors.hpp"
#include "rjfit/family.hpp"
#include "rjfit/special_functions.hpp"

namespace rjfit {

/// Tunables of the trans-distributional chain. Defaults are the published
/// run settings.
struct SamplerConfig {
  double p_life = 0.4;
  double p_intra = 0.3;
  double p_inter = 0.3;
  double prior_a = 1.0;          // inverse-gamma shape
  double prior_b = 1.0;          // inverse-gamma scale
  double xi_scale = 0.01;        // variance of the life-move proposal
  double laplace_scale = 0.4;    // scale of the discretized Laplace proposal
  double grid_step = 0.05;
  ShapeBounds alpha_max{2.0, 2.0, 5.0};
  std::size_t n_iter = 5000;
  std::size_t burn_in = 2500;
  double flom_divisor = 10.0;
  double flom_safety = 0.45;
  std::uint64_t seed = 1;
};

inline void validate(const SamplerConfig& c) {
  const auto fail = [](const std::string& what) {
    throw config_error("invalid sampler configuration: " + what);
  };
  for (double p : {c.p_life, c.p_intra, c.p_inter}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("move probabilities must lie in [0, 1]");
  }
  if (std::fabs(c.p_life + c.p_intra + c.p_inter - 1.0) > 1e-9) {
    fail("move probabilities must sum to 1");
  }
  if (!(c.prior_a > 0.0 && c.prior_b > 0.0)) fail("prior a, b must be > 0");
  if (!(c.xi_scale > 0.0 && std::isfinite(c.xi_scale))) fail("xi_scale must be > 0");
  if (!(c.laplace_scale > 0.0)) fail("laplace_scale must be > 0");
  if (!(c.grid_step > 0.0)) fail("grid_step must be > 0");
  if (!(c.alpha_max.sas > 0.0 && c.alpha_max.sas <= 2.0)) {
    fail("alpha_max for SaS must lie in (0, 2]");
  }
  for (Family f : all_families) {
    if (!(c.alpha_max[f] >= c.grid_step && std::isfinite(c.alpha_max[f]))) {
      fail("every alpha_max must be at least one grid step");
    }
  }
  if (c.n_iter < 1) fail("n_iter must be at least 1");
  if (!(c.burn_in < c.n_iter)) fail("burn_in must be smaller than n_iter");
  if (!(c.flom_divisor > 0.0)) fail("flom_divisor must be > 0");
  if (!(c.flom_safety > 0.0 && c.flom_safety < 1.0)) {
    fail("flom_safety must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Shape grid: alpha = index * grid_step, index in [1, grid_size(family)].

inline int grid_size(const SamplerConfig& c, Family f) {
  return static_cast<int>(std::floor(c.alpha_max[f] / c.grid_step + 1e-9));
}

inline double grid_alpha(const SamplerConfig& c, int index) {
  return static_cast<double>(index) * c.grid_step;
}

inline bool on_grid(const SamplerConfig& c, Family f, int index) {
  return index >= 1 && index <= grid_size(c, f);
}

// ---------------------------------------------------------------------------
// Priors.

/// log IG(gamma; a, b) = a log b - log Gamma(a) - (a+1) log gamma - b/gamma.
inline double prior_log_density_gamma(double gamma, double a, double b) {
  if (!(gamma > 0.0 && a > 0.0 && b > 0.0)) {
    throw std::invalid_argument(
        "prior_log_density_gamma: arguments must be positive");
  }
  return a * std::log(b) - log_abs_gamma(a) - (a + 1.0) * std::log(gamma) -
         b / gamma;
}

/// log of the discrete uniform shape prior on the family's grid.
inline double prior_log_mass_alpha(const SamplerConfig& c, Family f) {
  return -std::log(static_cast<double>(grid_size(c, f)));
}

// ---------------------------------------------------------------------------
// Likelihood models.

template <class L>
concept LikelihoodModel = requires(const L& l, const DistSpec& s) {
  { l(s) } -> std::convertible_to<double>;
};

/// Log-likelihood of a fixed data vector.
class DataLikelihood {
 public:
  explicit DataLikelihood(std::vector<double> data) : data_(std::move(data)) {
    if (data_.empty()) throw std::invalid_argument("empty data");
    for (double x : data_) {
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite datum");
    }
  }
  double operator()(const DistSpec& spec) const {
    return log_likelihood(spec, data_);
  }
  std::span<const double> data() const { return data_; }

 private:
  std::vector<double> data_;
};

/// Constant log-likelihood; the chain then targets the prior.
struct FlatLikelihood {
  double operator()(const DistSpec&) const { return 0.0; }
};

// ---------------------------------------------------------------------------
// Chain state.

struct ModelState {
  DistSpec spec;
  int grid_index = 0;
  double log_likelihood = 0.0;
  double log_prior_gamma = 0.0;

  Family family() const { return spec.family; }
  double alpha() const { return spec.alpha; }
  double gamma() const { return spec.gamma; }
};

template <LikelihoodModel L>
ModelState make_state(Family family, int grid_index, double gamma,
                      const SamplerConfig& cfg, const L& likelihood) {
  ModelState s;
  s.spec = DistSpec{family, grid_alpha(cfg, grid_index), gamma, 0.0};
  s.grid_index = grid_index;
  s.log_likelihood = likelihood(s.spec);
  s.log_prior_gamma = prior_log_density_gamma(gamma, cfg.prior_a, cfg.prior_b);
  return s;
}

template <LikelihoodModel L>
void check_state_cache([[maybe_unused]] const ModelState& s,
                       [[maybe_unused]] const SamplerConfig& cfg,
                       [[maybe_unused]] const L& likelihood) {
#ifndef NDEBUG
  const double ll = likelihood(s.spec);
  const double lp = prior_log_density_gamma(s.spec.gamma, cfg.prior_a, cfg.prior_b);
  assert(std::fabs(ll - s.log_likelihood) <= 1e-9 * std::max(1.0, std::fabs(ll)));
  assert(std::fabs(lp - s.log_prior_gamma) <= 1e-9 * std::max(1.0, std::fabs(lp)));
  assert(s.spec.alpha == grid_alpha(cfg, s.grid_index));
#endif
}

// ---------------------------------------------------------------------------
// Moves and their records.

enum class MoveKind : std::uint8_t { init = 0, life = 1, intra = 2, inter = 3 };

inline constexpr std::string_view move_name(MoveKind m) {
  switch (m) {
    case MoveKind::init:
      return "init";
    case MoveKind::life:
      return "life";
    case MoveKind::intra:
      return "intra";
    case MoveKind::inter:
      return "inter";
  }
  return "?";
}

struct MoveRecord {
  MoveKind kind = MoveKind::init;
  bool valid = false;     // false when the proposal left the state space
  bool accepted = false;
  double log_ratio = -std::numeric_limits<double>::infinity();
  double flom_order = 0.0;  // p used by switch moves, 0 otherwise
  DistSpec candidate{};     // proposed member (valid moves only)
};

/// Metropolis-Hastings decision: accept with probability min{1, exp(log_ratio)}.
template <class Rng>
bool accept(double log_ratio, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  if (std::isnan(log_ratio)) return false;
  return std::log(u) < log_ratio;
}

// ---------------------------------------------------------------------------
// Life move: gamma' ~ N(gamma, xi_scale) truncated to (0, gamma + 1].

/// log density of N(mean, sd^2) truncated to (0, mean + 1] at x.
inline double log_truncated_normal_density(double x, double mean, double sd) {
  const double upper = mean + 1.0;
  if (!(x > 0.0 && x <= upper)) return -std::numeric_limits<double>::infinity();
  const double z = (x - mean) / sd;
  // Phi(b) - Phi(a) with a = -mean/sd, b = 1/sd.
  const double a = -mean / sd;
  const double b = 1.0 / sd;
  const double mass = 0.5 * (std::erfc(-b / std::numbers::sqrt2) -
                             std::erfc(-a / std::numbers::sqrt2));
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi) -
         std::log(mass);
}

/// Rejection draw; nullopt after 10^4 failed attempts.
template <class Rng>
std::optional<double> draw_truncated_normal(double mean, double sd, Rng& rng) {
  std::normal_distribution<double> normal(mean, sd);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = normal(rng);
    if (x > 0.0 && x <= mean + 1.0) return x;
  }
  return std::nullopt;
}

/// Log acceptance ratio of a life move from `current` to `candidate`.
inline double life_log_ratio(const ModelState& current, const ModelState& candidate,
                             const SamplerConfig& cfg) {
  const double sd = std::sqrt(cfg.xi_scale);
  const double forward =
      log_truncated_normal_density(candidate.gamma(), current.gamma(), sd);
  const double reverse =
      log_truncated_normal_density(current.gamma(), candidate.gamma(), sd);
  if (std::isinf(forward) || std::isinf(reverse)) {
    return -std::numeric_limits<double>::infinity();
  }
  return (candidate.log_likelihood - current.log_likelihood) +
         (candidate.log_prior_gamma - current.log_prior_gamma) + reverse - forward;
}

// ---------------------------------------------------------------------------
// FLOM-matched scale maps.

/// Result of mapping gamma so that E|X|^p is preserved.
struct ScaleMap {
  double gamma_p = 0.0;
  double log_jacobian_scale = 0.0;  // log |d gamma' / d gamma|
  double log_jacobian_shape = 0.0;  // log |d alpha' / d alpha| (inter only)

  double log_jacobian() const { return log_jacobian_scale + log_jacobian_shape; }
};

/*
 * FLOM order for a switch between (from, alpha) and (to, alpha_p).
 *
 * p = min(alpha, alpha_p) / flom_divisor. The order depends on the
 * unordered pair only, so the reverse move uses the same p and the scale
 * map is an exact bijection. When a side whose moment requires p < alpha
 * (SαS, t) would get p >= flom_safety * min(alpha, alpha_p), p is reduced to
 * that value.
 */
inline double flom_order(Family from, double alpha, Family to, double alpha_p,
                         const SamplerConfig& cfg) {
  const double smallest = std::min(alpha, alpha_p);
  double p = smallest / cfg.flom_divisor;
  const bool restricted = from != Family::gg || to != Family::gg;
  if (restricted && p >= cfg.flom_safety * smallest) {
    p = cfg.flom_safety * smallest;
  }
  return p;
}

/// gamma' with C_to(p, alpha_p) gamma'^e_to = C_from(p, alpha) gamma^e_from.
/// nullopt when a constant is undefined or gamma' is not a positive double.
inline std::optional<ScaleMap> flom_matched_scale(Family from, double alpha,
                                                  Family to, double alpha_p,
                                                  double gamma, double p) {
  double log_c_from;
  double log_c_to;
  try {
    log_c_from = log_flom_constant(from, p, alpha);
    log_c_to = log_flom_constant(to, p, alpha_p);
  } catch (const std::domain_error&) {
    return std::nullopt;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  const double e_from = flom_scale_exponent(from, p, alpha);
  const double e_to = flom_scale_exponent(to, p, alpha_p);
  const double log_gamma = std::log(gamma);
  const double log_gamma_p = (log_c_from - log_c_to + e_from * log_gamma) / e_to;
  if (!(std::fabs(log_gamma_p) < 700.0)) return std::nullopt;
  ScaleMap m;
  m.gamma_p = std::exp(log_gamma_p);
  // d log gamma' / d log gamma = e_from / e_to.
  m.log_jacobian_scale = std::log(e_from / e_to) + log_gamma_p - log_gamma;
  return m;
}

/// Intra-class map g(alpha, alpha', p, gamma).
inline std::optional<ScaleMap> map_scale_intra(Family family, double alpha,
                                               double alpha_p, double gamma,
                                               double p) {
  return flom_matched_scale(family, alpha, family, alpha_p, gamma, p);
}

// ---------------------------------------------------------------------------
// Inter-class shape maps psi.
//
//   f1(a) = a^2 / 2                 SαS -> GG
//   f2(a) = logit((a + 2) / 4)      SαS -> t   (natural log; = 2 atanh(a/2))
//   GG -> t = f2(f1^-1(a)),  t -> GG = f1(f2^-1(a))

namespace shape_maps {

inline double f1(double a) { return 0.5 * a * a; }
inline double f1_inverse(double a) { return std::sqrt(2.0 * a); }
inline double f2(double a) { return std::log((a + 2.0) / (2.0 - a)); }
inline double f2_inverse(double a) { return 2.0 * std::tanh(0.5 * a); }

inline double f1_derivative(double a) { return a; }
inline double f1_inverse_derivative(double a) { return 1.0 / std::sqrt(2.0 * a); }
inline double f2_derivative(double a) { return 4.0 / (4.0 - a * a); }
inline double f2_inverse_derivative(double a) {
  const double t = std::tanh(0.5 * a);
  return 1.0 - t * t;
}

}  // namespace shape_maps

/// Continuous psi(alpha, from, to). nullopt at singularities (e.g. f2 at 2).
inline std::optional<double> shape_map(double alpha, Family from, Family to) {
  using namespace shape_maps;
  if (!(alpha > 0.0)) return std::nullopt;
  double out = alpha;
  if (from == to) return alpha;
  if (from == Family::sas && to == Family::gg) {
    out = f1(alpha);
  } else if (from == Family::sas && to == Family::t) {
    if (alpha >= 2.0) return std::nullopt;
    out = f2(alpha);
  } else if (from == Family::gg && to == Family::sas) {
    out = f1_inverse(alpha);
  } else if (from == Family::gg && to == Family::t) {
    const double s = f1_inverse(alpha);
    if (s >= 2.0) return std::nullopt;
    out = f2(s);
  } else if (from == Family::t && to == Family::sas) {
    out = f2_inverse(alpha);
  } else {  // t -> GG
    out = f1(f2_inverse(alpha));
  }
  if (!(std::isfinite(out) && out > 0.0)) return std::nullopt;
  return out;
}

/// d psi / d alpha, analytic.
inline double shape_map_derivative(double alpha, Family from, Family to) {
  using namespace shape_maps;
  if (from == to) return 1.0;
  if (from == Family::sas && to == Family::gg) return f1_derivative(alpha);
  if (from == Family::sas && to == Family::t) return f2_derivative(alpha);
  if (from == Family::gg && to == Family::sas) return f1_inverse_derivative(alpha);
  if (from == Family::gg && to == Family::t) {
    const double s = f1_inverse(alpha);
    return f2_derivative(s) * f1_inverse_derivative(alpha);
  }
  if (from == Family::t && to == Family::sas) return f2_inverse_derivative(alpha);
  const double s = f2_inverse(alpha);  // t -> GG
  return f1_derivative(s) * f2_inverse_derivative(alpha);
}

/*
 * psi snapped to the destination grid. The snapped pair must map back onto
 * the starting grid point, otherwise the move is invalid; this keeps the
 * inter-class move an involution between grid points.
 */
inline std::optional<int> map_shape_inter(int grid_index, Family from, Family to,
                                          const SamplerConfig& cfg) {
  const auto snap = [&](double a) {
    return static_cast<int>(std::llround(a / cfg.grid_step));
  };
  const auto forward = shape_map(grid_alpha(cfg, grid_index), from, to);
  if (!forward) return std::nullopt;
  const int target = snap(*forward);
  if (!on_grid(cfg, to, target)) return std::nullopt;
  const auto back = shape_map(grid_alpha(cfg, target), to, from);
  if (!back || snap(*back) != grid_index) return std::nullopt;
  return target;
}

/// Inter-class map w(alpha, alpha', p, gamma) with both Jacobian factors.
/// alpha_p is the destination shape actually used; the shape factor is the
/// analytic derivative of the continuous psi at alpha.
inline std::optional<ScaleMap> map_scale_inter(double alpha, double alpha_p,
                                               double gamma, double p,
                                               Family from, Family to) {
  auto m = flom_matched_scale(from, alpha, to, alpha_p, gamma, p);
  if (!m) return std::nullopt;
  m->log_jacobian_shape = std::log(std::fabs(shape_map_derivative(alpha, from, to)));
  return m;
}

// ---------------------------------------------------------------------------
// Switch proposals (deterministic part) and their acceptance ratios.

struct SwitchProposal {
  ModelState candidate;
  double flom_order = 0.0;
  ScaleMap map;
};

/// Discretized Laplace step on the grid: P(offset = +-j) proportional to
/// exp(-j * grid_step / laplace_scale), j >= 1.
template <class Rng>
int propose_grid_offset(const SamplerConfig& cfg, Rng& rng) {
  const double ratio = std::exp(-cfg.grid_step / cfg.laplace_scale);
  std::geometric_distribution<int> geometric(1.0 - ratio);
  std::bernoulli_distribution coin(0.5);
  const int magnitude = 1 + geometric(rng);
  return coin(rng) ? magnitude : -magnitude;
}

/// alpha' from the discretized Laplace centred at alpha. The result may lie
/// outside (0, alpha_max(family)]; such proposals are rejected by the move.
template <class Rng>
double propose_alpha_discrete_laplace(double alpha, Family /*family*/,
                                      const SamplerConfig& cfg, Rng& rng) {
  const int index = static_cast<int>(std::llround(alpha / cfg.grid_step));
  return grid_alpha(cfg, index + propose_grid_offset(cfg, rng));
}

template <LikelihoodModel L>
std::optional<SwitchProposal> make_intra_proposal(const ModelState& current,
                                                  int target_index,
                                                  const SamplerConfig& cfg,
                                                  const L& likelihood) {
  const Family f = current.family();
  if (!on_grid(cfg, f, target_index)) return std::nullopt;
  const double alpha_p = grid_alpha(cfg, target_index);
  const double p = flom_order(f, current.alpha(), f, alpha_p, cfg);
  const auto map = map_scale_intra(f, current.alpha(), alpha_p, current.gamma(), p);
  if (!map) return std::nullopt;
  SwitchProposal out;
  out.candidate = make_state(f, target_index, map->gamma_p, cfg, likelihood);
  out.flom_order = p;
  out.map = *map;
  return out;
}

inline double intra_log_ratio(const ModelState& current, const SwitchProposal& prop) {
  return (prop.candidate.log_likelihood - current.log_likelihood) +
         (prop.candidate.log_prior_gamma - current.log_prior_gamma) +
         prop.map.log_jacobian_scale;
}

template <LikelihoodModel L>
std::optional<SwitchProposal> make_inter_proposal(const ModelState& current,
                                                  Family target,
                                                  const SamplerConfig& cfg,
                                                  const L& likelihood) {
  const Family from = current.family();
  if (target == from) return std::nullopt;
  const auto index = map_shape_inter(current.grid_index, from, target, cfg);
  if (!index) return std::nullopt;
  const double alpha_p = grid_alpha(cfg, *index);
  const double p = flom_order(from, current.alpha(), target, alpha_p, cfg);
  const auto map =
      map_scale_inter(current.alpha(), alpha_p, current.gamma(), p, from, target);
  if (!map) return std::nullopt;
  SwitchProposal out;
  out.candidate = make_state(target, *index, map->gamma_p, cfg, likelihood);
  out.flom_order = p;
  out.map = *map;
  return out;
}

/// Log acceptance ratio of an inter-class switch. The shape lives on a
/// grid and the snapped shape map is a bijection between grid points, so
/// the shape prior enters as a ratio of grid masses and only the scale
/// Jacobian applies.
inline double inter_log_ratio(const ModelState& current, const SwitchProposal& prop,
                              const SamplerConfig& cfg) {
  return (prop.candidate.log_likelihood - current.log_likelihood) +
         (prop.candidate.log_prior_gamma - current.log_prior_gamma) +
         (prior_log_mass_alpha(cfg, prop.candidate.family()) -
          prior_log_mass_alpha(cfg, current.family())) +
         prop.map.log_jacobian_scale;
}

// ---------------------------------------------------------------------------
// Steps.

using StepResult = std::pair<ModelState, MoveRecord>;

template <LikelihoodModel L, class Rng>
StepResult step_life(const ModelState& state, const L& likelihood,
                     const SamplerConfig& cfg, Rng& rng) {
  MoveRecord rec;
  rec.kind = MoveKind::life;
  const auto gamma_p = draw_truncated_normal(state.gamma(), std::sqrt(cfg.xi_scale), rng);
  if (!gamma_p) return {state, rec};
  const ModelState candidate =
      make_state(state.family(), state.grid_index, *gamma_p, cfg, likelihood);
  rec.valid = true;
  rec.candidate = candidate.spec;
  rec.log_ratio = life_log_ratio(state, candidate, cfg);
  rec.accepted = accept(rec.log_ratio, rng);
  return {rec.accepted ? candidate : state, rec};
}

template <LikelihoodModel L, class Rng>
StepResult step_intra(const ModelState& state, const L& likelihood,
                      const SamplerConfig& cfg, Rng& rng) {
  MoveRecord rec;
  rec.kind = MoveKind::intra;
  const int target = state.grid_index + propose_grid_offset(cfg, rng);
  const auto prop = make_intra_proposal(state, target, cfg, likelihood);
  if (!prop) return {state, rec};
  rec.valid = true;
  rec.candidate = prop->candidate.spec;
  rec.flom_order = prop->flom_order;
  rec.log_ratio = intra_log_ratio(state, *prop);
  rec.accepted = accept(rec.log_ratio, rng);
  return {rec.accepted ? prop->candidate : state, rec};
}

/// The other two families, in code order.
inline std::pair<Family, Family> other_families(Family f) {
  switch (f) {
    case Family::sas:
      return {Family::gg, Family::t};
    case Family::gg:
      return {Family::sas, Family::t};
    case Family::t:
      return {Family::sas, Family::gg};
  }
  return {Family::sas, Family::gg};
}

template <class Rng>
Family draw_other_family(Family f, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  const auto [first, second] = other_families(f);
  return coin(rng) ? second : first;
}

template <LikelihoodModel L, class Rng>
StepResult step_inter(const ModelState& state, const L& likelihood,
                      const SamplerConfig& cfg, Rng& rng) {
  MoveRecord rec;
  rec.kind = MoveKind::inter;
  const Family target = draw_other_family(state.family(), rng);
  const auto prop = make_inter_proposal(state, target, cfg, likelihood);
  if (!prop) {
    rec.candidate = DistSpec{target, 0.0, 0.0, 0.0};
    return {state, rec};
  }
  rec.valid = true;
  rec.candidate = prop->candidate.spec;
  rec.flom_order = prop->flom_order;
  rec.log_ratio = inter_log_ratio(state, *prop, cfg);
  rec.accepted = accept(rec.log_ratio, rng);
  return {rec.accepted ? prop->candidate : state, rec};
}

// ---------------------------------------------------------------------------
// Chain driver.

struct TraceState {
  std::size_t iteration = 0;
  Family family = Family::gg;
  double alpha = 0.0;
  double gamma = 0.0;

  friend bool operator==(const TraceState&, const TraceState&) = default;
};

struct ChainTrace {
  std::vector<TraceState> states;
  std::vector<MoveRecord> moves;
};

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double interquartile_range(std::span<const double> data) {
  std::vector<double> v(data.begin(), data.end());
  return quantile(v, 0.75) - quantile(v, 0.25);
}

/// Initial gamma: half the interquartile range. Throws degenerate_data_error
/// for a zero IQR.
inline double initial_gamma(std::span<const double> data) {
  const double iqr = interquartile_range(data);
  if (!(iqr > 0.0)) {
    throw degenerate_data_error(
        "interquartile range of the data is zero; every candidate likelihood "
        "is unbounded");
  }
  return 0.5 * iqr;
}

/// Runs n_iter iterations. Entry 0 of the trace is the initial state; each
/// later entry follows one move drawn by (p_life, p_intra, p_inter).
template <LikelihoodModel L, class Rng>
ChainTrace run_chain(const L& likelihood, ModelState state,
                     const SamplerConfig& cfg, Rng& rng) {
  validate(cfg);
  ChainTrace trace;
  trace.states.reserve(cfg.n_iter);
  trace.moves.reserve(cfg.n_iter);
  trace.states.push_back({0, state.family(), state.alpha(), state.gamma()});
  trace.moves.push_back(MoveRecord{});
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t it = 1; it < cfg.n_iter; ++it) {
    const double u = uniform(rng);
    StepResult result;
    if (u < cfg.p_life) {
      result = step_life(state, likelihood, cfg, rng);
    } else if (u < cfg.p_life + cfg.p_intra) {
      result = step_intra(state, likelihood, cfg, rng);
    } else {
      result = step_inter(state, likelihood, cfg, rng);
    }
    state = result.first;
    check_state_cache(state, cfg, likelihood);
    trace.states.push_back({it, state.family(), state.alpha(), state.gamma()});
    trace.moves.push_back(result.second);
  }
  return trace;
}

/// Initial state for data: GG with the largest grid shape not above 2,
/// gamma = IQR / 2.
template <LikelihoodModel L>
ModelState initial_state(std::span<const double> data, const SamplerConfig& cfg,
                         const L& likelihood) {
  const int index = std::min(grid_size(cfg, Family::gg),
                             static_cast<int>(std::llround(2.0 / cfg.grid_step)));
  return make_state(Family::gg, index, initial_gamma(data), cfg, likelihood);
}

template <class Rng>
ChainTrace run_chain(std::span<const double> data, const SamplerConfig& cfg,
                     Rng& rng) {
  validate(cfg);
  if (data.empty()) throw std::invalid_argument("run_chain: empty data");
  const DataLikelihood likelihood(std::vector<double>(data.begin(), data.end()));
  return run_chain(likelihood, initial_state(data, cfg, likelihood), cfg, rng);
}

// ---------------------------------------------------------------------------
// Posterior summary.

struct GoodnessOfFit {
  double kl = std::numeric_limits<double>::quiet_NaN();
  double ks_score = std::numeric_limits<double>::quiet_NaN();
  double ks_p_value = std::numeric_limits<double>::quiet_NaN();
};

struct FitReport {
  Family modal_family = Family::gg;
  std::array<double, 3> family_frequencies{};  // indexed by family_index
  double alpha_hat = 0.0;
  double gamma_hat = 0.0;
  std::pair<double, double> alpha_ci{};  // mean -+ one posterior std
  std::pair<double, double> gamma_ci{};
  std::size_t modal_count = 0;
  GoodnessOfFit diagnostics;
  SamplerConfig config;
  std::uint64_t seed = 0;

  DistSpec spec() const { return DistSpec{modal_family, alpha_hat, gamma_hat, 0.0}; }
};

/// Drops the first burn_in states; the modal family is the most frequent one
/// (ties go to the lower family code), and alpha/gamma are averaged over the
/// states in that family.
inline FitReport summarize(const ChainTrace& trace, const SamplerConfig& cfg) {
  if (trace.states.size() <= cfg.burn_in) {
    throw std::invalid_argument("summarize: trace shorter than burn-in");
  }
  const auto kept = std::span(trace.states).subspan(cfg.burn_in);
  std::array<std::size_t, 3> counts{};
  for (const auto& s : kept) ++counts[family_index(s.family)];
  FitReport r;
  r.config = cfg;
  r.seed = cfg.seed;
  std::size_t best = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    r.family_frequencies[i] =
        static_cast<double>(counts[i]) / static_cast<double>(kept.size());
    if (counts[i] > counts[best]) best = i;
  }
  r.modal_family = all_families[best];
  r.modal_count = counts[best];
  double sa = 0.0, sg = 0.0;
  for (const auto& s : kept) {
    if (s.family != r.modal_family) continue;
    sa += s.alpha;
    sg += s.gamma;
  }
  const double n = static_cast<double>(r.modal_count);
  r.alpha_hat = sa / n;
  r.gamma_hat = sg / n;
  double va = 0.0, vg = 0.0;
  for (const auto& s : kept) {
    if (s.family != r.modal_family) continue;
    va += (s.alpha - r.alpha_hat) * (s.alpha - r.alpha_hat);
    vg += (s.gamma - r.gamma_hat) * (s.gamma - r.gamma_hat);
  }
  const double sd_a = std::sqrt(va / n);
  const double sd_g = std::sqrt(vg / n);
  r.alpha_ci = {r.alpha_hat - sd_a, r.alpha_hat + sd_a};
  r.gamma_ci = {r.gamma_hat - sd_g, r.gamma_hat + sd_g};
  return r;
}

}  // namespace rjfit

#endif  // RJFIT_SAMPLER_HPP_
