#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pfmcf/experiment.hpp"
#include "pfmcf/profile.hpp"
#include "pfmcf/reaction.hpp"
#include "pfmcf/stepper.hpp"

namespace pfmcf {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// q-profile circle of radius r centred in a P² box, ε = 2/P.
inline ScalarField profile_circle(int p, double r) {
  return init_phase_field(GridSpec{2, p}, Circle{{0, 0, 0}, r}, 2.0 / p);
}

}  // namespace detail

inline CheckResult check_eta_endpoint() {
  const auto eta = solve_eta();
  const double target = PotentialModel::cw / PotentialModel::w_second(0.0);
  const double err = std::max(std::abs(eta.values.front() - target), std::abs(eta.values.back() - target));
  return {"eta_endpoint", err <= 1e-3, "max |eta(+-L) - cW/W''(0)| = " + detail::fmt(err)};
}

inline CheckResult check_xi_bound() {
  const double c = fitted_decay_constant(solve_xi());
  return {"xi_decay_bound", c <= 10.0, "fitted C = " + detail::fmt(c) + " (bound 10)"};
}

/// Residual order between 2001 and 4001 points, where the coarse-grid
/// truncation error still dominates round-off for both tables.
inline CheckResult check_profile_residual_order() {
  const double eta_order = std::log2(eta_residual(solve_eta(20.0, 2001)) / eta_residual(solve_eta(20.0, 4001)));
  const double xi_order = std::log2(xi_residual(solve_xi(20.0, 2001)) / xi_residual(solve_xi(20.0, 4001)));
  const bool ok = eta_order >= 1.8 && xi_order >= 1.8;
  return {"profile_residual_order", ok,
          "eta order " + detail::fmt(eta_order) + ", xi order " + detail::fmt(xi_order) + " (>= 1.8)"};
}

/// Mass of a q-profile circle against the enclosed area over P = 64, 128, 256.
inline CheckResult check_volume_order(double r = 0.25) {
  std::vector<double> eps, err;
  for (int p : {64, 128, 256}) {
    eps.push_back(2.0 / p);
    err.push_back(std::abs(integrate(detail::profile_circle(p, r)) - std::numbers::pi * r * r));
  }
  const double slope = fit_loglog_slope(eps, err);
  return {"volume_order", slope >= 1.8, "fitted order " + detail::fmt(slope)};
}

/// Nonlocal multiplier of q-profile circles against 1/R over P = 64, 128, 256.
inline CheckResult check_multiplier_order(double r) {
  std::vector<double> eps, err;
  for (int p : {64, 128, 256}) {
    const ScalarField u = detail::profile_circle(p, r);
    const ScalarField g(u.grid, 0.0);
    eps.push_back(2.0 / p);
    err.push_back(std::abs(multiplier_values(u, g, 2.0 / p).g_tilde_eps - 1.0 / r));
  }
  const double slope = fit_loglog_slope(eps, err);
  return {"multiplier_order_R" + detail::fmt(r), slope >= 1.8, "fitted order " + detail::fmt(slope)};
}

inline CheckResult check_diffusion_round_trip() {
  ScalarField u = detail::profile_circle(64, 0.25);
  const ScalarField v = SpectralDiffusion::round_trip(u);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(u[i] - v[i]));
  return {"fft_round_trip", worst <= 1e-13, "max deviation " + detail::fmt(worst)};
}

/// Plain flow at Δt = Mε² for `steps` steps keeps u in [0, 1].
inline CheckResult check_max_principle(int steps = 2000, int p = 64) {
  SimConfig cfg;
  cfg.grid = GridSpec{2, p};
  cfg.eps = 2.0 / p;
  cfg.dt = PotentialModel::stability_m * cfg.eps * cfg.eps;
  cfg.t_end = steps * cfg.dt;
  cfg.shape = CircleUnion{{Circle{{-0.2, 0.1, 0}, 0.12}, Circle{{0.15, -0.1, 0}, 0.2}}};
  Stepper stepper(cfg);
  SimState s = stepper.initial_state();
  double lo = s.u.min(), hi = s.u.max();
  for (int n = 0; n < steps; ++n) {
    stepper.step(s);
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  }
  return {"max_principle", lo >= 0.0 && hi <= 1.0,
          std::to_string(steps) + " steps, min " + detail::fmt(lo) + ", max " + detail::fmt(hi)};
}

/// Two nested circles under the modified forced flow with |g| <= 2 stay ordered.
inline CheckResult check_comparison(int steps = 400, int p = 64) {
  SimConfig cfg;
  cfg.grid = GridSpec{2, p};
  cfg.eps = 2.0 / p;
  cfg.dt = 1.0 / (static_cast<double>(p) * p);
  cfg.t_end = steps * cfg.dt;
  cfg.form = ReactionFormId::modified_forced;
  cfg.forcing = RadialCosineForcing{2.0, 8.0};
  cfg.shape = Circle{{0, 0, 0}, 0.2};
  Stepper lower(cfg);
  cfg.shape = Circle{{0, 0, 0}, 0.28};
  Stepper upper(cfg);
  SimState v = lower.initial_state(), u = upper.initial_state();
  double worst = 0.0;
  for (int n = 0; n <= steps; ++n) {
    for (std::size_t i = 0; i < u.u.size(); ++i) worst = std::min(worst, u.u[i] - v.u[i]);
    if (n < steps) {
      upper.step(u);
      lower.step(v);
    }
  }
  return {"comparison_principle", worst >= -1e-10, "min(u - v) = " + detail::fmt(worst)};
}

/// Both conserved forms keep the discrete mass to round-off.
inline CheckResult check_mass_conservation(int p = 64, double t_end = 0.005) {
  double worst = 0.0;
  for (auto form : {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved}) {
    SimConfig cfg;
    cfg.grid = GridSpec{2, p};
    cfg.eps = 2.0 / p;
    cfg.dt = 1.0 / (static_cast<double>(p) * p);
    cfg.t_end = t_end;
    cfg.form = form;
    cfg.shape = CircleUnion{{Circle{{-0.22, 0, 0}, 0.1}, Circle{{0.18, 0, 0}, 0.15}}};
    double m0 = std::numeric_limits<double>::quiet_NaN();
    run(cfg, [&](const SimState& s) {
      const double m = integrate(s.u);
      if (std::isnan(m0)) m0 = m;
      worst = std::max(worst, std::abs(m - m0) / m0);
    });
  }
  return {"mass_conservation", worst <= 1e-10, "max relative drift " + detail::fmt(worst)};
}

inline std::vector<CheckResult> run_property_checks() {
  return {check_eta_endpoint(),       check_xi_bound(),
          check_profile_residual_order(), check_volume_order(),
          check_multiplier_order(0.1),  check_multiplier_order(0.25),
          check_diffusion_round_trip(), check_max_principle(),
          check_comparison(),           check_mass_conservation()};
}

}  // namespace pfmcf
