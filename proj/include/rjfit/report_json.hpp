#ifndef RJFIT_REPORT_JSON_HPP_
#define RJFIT_REPORT_JSON_HPP_

#include <string>

#include "json.hpp"

#include "rjfit/pipeline.hpp"

namespace rjfit {

using Json = nlohmann::ordered_json;

inline Json to_json(const ShapeBounds& b) {
  return Json{{"sas", b.sas}, {"gg", b.gg}, {"t", b.t}};
}

inline Json to_json(const SamplerConfig& c) {
  return Json{{"p_life", c.p_life},
              {"p_intra", c.p_intra},
              {"p_inter", c.p_inter},
              {"prior_a", c.prior_a},
              {"prior_b", c.prior_b},
              {"xi_scale", c.xi_scale},
              {"laplace_scale", c.laplace_scale},
              {"grid_step", c.grid_step},
              {"alpha_max", to_json(c.alpha_max)},
              {"n_iter", c.n_iter},
              {"burn_in", c.burn_in},
              {"flom_divisor", c.flom_divisor},
              {"flom_safety", c.flom_safety},
              {"seed", c.seed}};
}

/// Overrides the fields present in `j`; unknown keys are a config error.
inline void apply_json(const Json& j, SamplerConfig& c) {
  if (!j.is_object()) throw config_error("configuration must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "p_life") c.p_life = value.get<double>();
      else if (key == "p_intra") c.p_intra = value.get<double>();
      else if (key == "p_inter") c.p_inter = value.get<double>();
      else if (key == "prior_a") c.prior_a = value.get<double>();
      else if (key == "prior_b") c.prior_b = value.get<double>();
      else if (key == "xi_scale") c.xi_scale = value.get<double>();
      else if (key == "laplace_scale") c.laplace_scale = value.get<double>();
      else if (key == "grid_step") c.grid_step = value.get<double>();
      else if (key == "n_iter") c.n_iter = value.get<std::size_t>();
      else if (key == "burn_in") c.burn_in = value.get<std::size_t>();
      else if (key == "flom_divisor") c.flom_divisor = value.get<double>();
      else if (key == "flom_safety") c.flom_safety = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "alpha_max") {
        for (const auto& [fam, bound] : value.items()) {
          const Family f = parse_family(fam);
          const double v = bound.get<double>();
          if (f == Family::sas) c.alpha_max.sas = v;
          else if (f == Family::gg) c.alpha_max.gg = v;
          else c.alpha_max.t = v;
        }
      } else {
        throw config_error("unknown configuration key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad configuration value: ") + e.what());
  } catch (const config_error&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
}

inline Json to_json(const DistSpec& s) {
  return Json{{"family", std::string(family_name(s.family))},
              {"alpha", s.alpha},
              {"gamma", s.gamma}};
}

inline Json to_json(const GoodnessOfFit& g) {
  return Json{{"kl", g.kl}, {"ks_score", g.ks_score}, {"ks_p_value", g.ks_p_value}};
}

inline Json family_map(const std::array<double, 3>& v) {
  return Json{{"sas", v[0]}, {"gg", v[1]}, {"t", v[2]}};
}

inline Json family_map(const std::array<std::size_t, 3>& v) {
  return Json{{"sas", v[0]}, {"gg", v[1]}, {"t", v[2]}};
}

inline Json to_json(const FitReport& r) {
  return Json{{"seed", r.seed},
              {"modal_family", std::string(family_name(r.modal_family))},
              {"family_frequencies", family_map(r.family_frequencies)},
              {"alpha_hat", r.alpha_hat},
              {"gamma_hat", r.gamma_hat},
              {"alpha_ci", {r.alpha_ci.first, r.alpha_ci.second}},
              {"gamma_ci", {r.gamma_ci.first, r.gamma_ci.second}},
              {"diagnostics", to_json(r.diagnostics)}};
}

inline Json to_json(const Aggregate& a) {
  return Json{{"rule", "plurality vote over chain modal families; alpha and gamma "
                       "averaged over the chains in the winning family"},
              {"family", std::string(family_name(a.family))},
              {"votes", family_map(a.votes)},
              {"alpha_hat", a.alpha_hat},
              {"gamma_hat", a.gamma_hat},
              {"alpha_sd_across_chains", a.alpha_sd},
              {"gamma_sd_across_chains", a.gamma_sd},
              {"diagnostics", to_json(a.diagnostics)}};
}

/// The run report. Contains no timestamps, so equal inputs give equal bytes.
inline Json fit_report_json(const std::string& input, std::size_t n_points,
                            const RunOptions& opts, const FitRun& run) {
  Json chains = Json::array();
  for (const auto& r : run.chains) chains.push_back(to_json(r));
  return Json{{"command", "fit"},
              {"input", input},
              {"n_points", n_points},
              {"seed", opts.config.seed},
              {"chains", opts.chains},
              {"histogram_bins", opts.hist_bins},
              {"config", to_json(opts.config)},
              {"aggregate", to_json(run.aggregate)},
              {"per_chain", std::move(chains)}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace rjfit

#endif  // RJFIT_REPORT_JSON_HPP_
