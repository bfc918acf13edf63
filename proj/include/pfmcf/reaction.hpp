#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>

#include "pfmcf/error.hpp"
#include "pfmcf/field.hpp"
#include "pfmcf/potential.hpp"

namespace pfmcf {

struct NoForcing {};
struct ConstantForcing {
  double cg = 0.0;
};
/// g(x) = c_g cos(k π |x|).
struct RadialCosineForcing {
  double cg = 0.0;
  double frequency = 8.0;
};
struct SampledForcing {
  ScalarField values;
};

using ForcingSpec = std::variant<NoForcing, ConstantForcing, RadialCosineForcing, SampledForcing>;

enum class ReactionFormId { classic_forced, modified_forced, classic_conserved, modified_conserved };

inline constexpr std::string_view to_string(ReactionFormId f) {
  switch (f) {
    case ReactionFormId::classic_forced: return "classic_forced";
    case ReactionFormId::modified_forced: return "modified_forced";
    case ReactionFormId::classic_conserved: return "classic_conserved";
    case ReactionFormId::modified_conserved: return "modified_conserved";
  }
  return "?";
}

inline ReactionFormId reaction_form_from_string(std::string_view s) {
  for (auto f : {ReactionFormId::classic_forced, ReactionFormId::modified_forced,
                 ReactionFormId::classic_conserved, ReactionFormId::modified_conserved}) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("form", "unknown reaction form '" + std::string(s) + "'");
}

inline constexpr bool is_conserved(ReactionFormId f) {
  return f == ReactionFormId::classic_conserved || f == ReactionFormId::modified_conserved;
}

inline ScalarField eval_forcing(const ForcingSpec& spec, const GridSpec& grid) {
  struct Visitor {
    const GridSpec& grid;
    ScalarField operator()(const NoForcing&) const { return ScalarField(grid, 0.0); }
    ScalarField operator()(const ConstantForcing& c) const { return ScalarField(grid, c.cg); }
    ScalarField operator()(const RadialCosineForcing& r) const {
      ScalarField g(grid);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.cell_center(i);
        const double radius = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        g[i] = r.cg * std::cos(r.frequency * std::numbers::pi * radius);
      }
      return g;
    }
    ScalarField operator()(const SampledForcing& s) const {
      if (!(s.values.grid == grid)) {
        throw ConfigError("forcing.grid", "sampled forcing grid does not match the simulation grid");
      }
      return s.values;
    }
  };
  return std::visit(Visitor{grid}, spec);
}

/// ∫√(2W(u)) below this means the interface has vanished.
inline constexpr double degenerate_threshold = 1e-12;

namespace detail {

inline void check_grids(const ScalarField& u, const ScalarField& g) {
  if (!(u.grid == g.grid)) throw std::invalid_argument("field and forcing grids differ");
}

}  // namespace detail

/// Pointwise reaction F(u) for the four forms. Nonlocal terms use the same
/// midpoint quadrature as integrate(), so conserved forms integrate to zero.
inline ScalarField eval_reaction(ReactionFormId form, const ScalarField& u, const ScalarField& g,
                                 double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  detail::check_grids(u, g);
  constexpr double cw = PotentialModel::cw;
  const std::size_t n = u.size();
  ScalarField f(u.grid);

  switch (form) {
    case ReactionFormId::classic_forced:
    case ReactionFormId::classic_conserved:
      for (std::size_t i = 0; i < n; ++i) f[i] = w_prime(u[i]) - eps * cw * g[i];
      break;
    case ReactionFormId::modified_forced:
    case ReactionFormId::modified_conserved:
      for (std::size_t i = 0; i < n; ++i) f[i] = w_prime(u[i]) - eps * g[i] * sqrt_two_w(u[i]);
      break;
  }

  if (form == ReactionFormId::classic_conserved) {
    const double mean = integrate(f);
    for (auto& v : f.data) v -= mean;
  } else if (form == ReactionFormId::modified_conserved) {
    ScalarField weight(u.grid);
    for (std::size_t i = 0; i < n; ++i) weight[i] = sqrt_two_w(u[i]);
    const double denominator = integrate(weight);
    if (denominator < degenerate_threshold) throw DegenerateError(denominator);
    const double lambda = integrate(f) / denominator;
    for (std::size_t i = 0; i < n; ++i) f[i] -= weight[i] * lambda;
  }
  return f;
}

struct MultiplierValues {
  double g_eps = 0.0;
  double g_tilde_eps = 0.0;
};

/// Lagrange multipliers of the two conserved models read as forcing terms:
///   g_ε  = (1/(ε c_W)) ⨏ (W'(u) - ε c_W g),
///   g̃_ε = (1/ε) ∫ (W'(u) - ε g √(2W(u))) / ∫ √(2W(u)).
inline MultiplierValues multiplier_values(const ScalarField& u, const ScalarField& g, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  detail::check_grids(u, g);
  constexpr double cw = PotentialModel::cw;
  const std::size_t n = u.size();
  std::vector<double> classic(n), modified(n), weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double wp = w_prime(u[i]);
    weight[i] = sqrt_two_w(u[i]);
    classic[i] = wp - eps * cw * g[i];
    modified[i] = wp - eps * g[i] * weight[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double denominator = compensated_sum(weight) * inv_n;
  if (denominator < degenerate_threshold) throw DegenerateError(denominator);
  MultiplierValues m;
  m.g_eps = compensated_sum(classic) * inv_n / (eps * cw);
  m.g_tilde_eps = compensated_sum(modified) * inv_n / denominator / eps;
  return m;
}

}  // namespace pfmcf
