#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "pfmcf/error.hpp"
#include "pfmcf/potential.hpp"

namespace pfmcf {

/// Heteroclinic profile q(s) = (1 - tanh(s/2))/2, going from 1 at -∞ to 0 at +∞.
inline double q_profile(double s) noexcept { return 0.5 * (1.0 - std::tanh(0.5 * s)); }

/// q'(s) = -q(1-q) = -√(2W(q)).
inline double q_profile_derivative(double s) noexcept {
  const double q = q_profile(s);
  return -q * (1.0 - q);
}

/// A 1D profile sampled on a uniform symmetric grid over [-L, L].
struct ProfileTable {
  double domain_half_width = 0.0;
  std::size_t n_points = 0;
  std::vector<double> s_values;
  std::vector<double> values;
  std::vector<double> derivative;

  double step() const { return s_values[1] - s_values[0]; }
  std::size_t center_index() const { return n_points / 2; }

  /// Piecewise-linear interpolation; constant extension outside [-L, L].
  double operator()(double s) const {
    if (s <= s_values.front()) return values.front();
    if (s >= s_values.back()) return values.back();
    const auto i = static_cast<std::size_t>(std::upper_bound(s_values.begin(), s_values.end(), s) -
                                            s_values.begin()) - 1;
    const double t = (s - s_values[i]) / (s_values[i + 1] - s_values[i]);
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
};

namespace detail {

inline std::vector<double> uniform_grid(double half_width, std::size_t n) {
  std::vector<double> s(n);
  const double h = 2.0 * half_width / static_cast<double>(n - 1);
  const std::size_t mid = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = (static_cast<double>(i) - static_cast<double>(mid)) * h;
  }
  return s;
}

/// Thomas algorithm for a tridiagonal system; `diag` and `rhs` are overwritten.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& lower,
                                             std::vector<double> diag,
                                             const std::vector<double>& upper,
                                             std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-300) throw SolverError("singular tridiagonal system");
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-300) throw SolverError("singular tridiagonal system");
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  }
  return x;
}

inline std::vector<double> centered_derivative(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return d;
}

/// Solves y'' - W''(q(s)) y = f(s) on [-L, L] with y(±L) = boundary by
/// second-order centered differences, then removes the span(q') component
/// so that y(0) = 0.
inline ProfileTable solve_linearized_bvp(double half_width, std::size_t n_points,
                                         const std::function<double(double)>& rhs,
                                         double boundary) {
  if (!(half_width > 0.0) || half_width < 10.0) {
    throw std::invalid_argument("profile half width must be >= 10");
  }
  if (n_points < 1001) throw std::invalid_argument("profile solve needs at least 1001 points");
  if (n_points % 2 == 0) throw std::invalid_argument("profile grid needs an odd point count");

  ProfileTable table;
  table.domain_half_width = half_width;
  table.n_points = n_points;
  table.s_values = uniform_grid(half_width, n_points);
  const double h = table.step();
  const double inv_h2 = 1.0 / (h * h);

  const std::size_t m = n_points - 2;
  std::vector<double> lower(m, inv_h2), diag(m), upper(m, inv_h2), b(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double s = table.s_values[k + 1];
    diag[k] = -2.0 * inv_h2 - w_second(q_profile(s));
    b[k] = rhs(s);
  }
  b.front() -= boundary * inv_h2;
  b.back() -= boundary * inv_h2;
  const auto interior = solve_tridiagonal(lower, std::move(diag), upper, std::move(b));

  table.values.resize(n_points);
  table.values.front() = boundary;
  table.values.back() = boundary;
  std::copy(interior.begin(), interior.end(), table.values.begin() + 1);

  const std::size_t c = table.center_index();
  const double alpha = table.values[c] / q_profile_derivative(0.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    table.values[i] -= alpha * q_profile_derivative(table.s_values[i]);
  }
  table.values[c] = 0.0;
  table.derivative = centered_derivative(table.values, h);
  return table;
}

/// max over nodes 2..n-3 of |y'' - W''(q) y - f| with y'' from the fourth-order
/// five-point stencil. Measures the truncation error of the second-order solve.
inline double bvp_residual(const ProfileTable& t, const std::function<double(double)>& rhs) {
  const double h = t.step();
  const auto& y = t.values;
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < t.n_points; ++i) {
    const double d2 =
        (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h * h);
    const double s = t.s_values[i];
    worst = std::max(worst, std::abs(d2 - w_second(q_profile(s)) * y[i] - rhs(s)));
  }
  return worst;
}

}  // namespace detail

/// Right-hand side of the first-order correction equation for η.
///
/// Written for the decreasing profile (q(-∞) = 1). With this orientation the
/// source is -c_W - q'; it is orthogonal to the kernel q', which is what makes a
/// bounded solution with limits c_W/W''(well) exist.
inline double eta_source(double s) noexcept {
  return -PotentialModel::cw - q_profile_derivative(s);
}

/// Right-hand side of the second-order correction equation for ξ.
inline double xi_source(double s) noexcept { return s * q_profile_derivative(s); }

/// Table of q and q' on the same grid the correction solvers use.
inline ProfileTable q_table(double half_width, std::size_t n_points) {
  ProfileTable t;
  t.domain_half_width = half_width;
  t.n_points = n_points;
  t.s_values = detail::uniform_grid(half_width, n_points);
  t.values.reserve(n_points);
  t.derivative.reserve(n_points);
  for (double s : t.s_values) {
    t.values.push_back(q_profile(s));
    t.derivative.push_back(q_profile_derivative(s));
  }
  return t;
}

/// η'' - W''(q) η = -c_W - q', η(±L) = c_W / W''(well) = c_W, η(0) = 0.
inline ProfileTable solve_eta(double half_width = 20.0, std::size_t n_points = 8001) {
  return detail::solve_linearized_bvp(half_width, n_points, eta_source,
                                      PotentialModel::cw / w_second(0.0));
}

/// ξ'' - W''(q) ξ = s q', ξ(±L) = 0, ξ(0) = 0.
inline ProfileTable solve_xi(double half_width = 20.0, std::size_t n_points = 8001) {
  return detail::solve_linearized_bvp(half_width, n_points, xi_source, 0.0);
}

inline double eta_residual(const ProfileTable& eta) { return detail::bvp_residual(eta, eta_source); }
inline double xi_residual(const ProfileTable& xi) { return detail::bvp_residual(xi, xi_source); }

/// Smallest C with |values(s)| <= C (1 + s²) |q'(s)| over the grid.
inline double fitted_decay_constant(const ProfileTable& t) {
  double c = 0.0;
  for (std::size_t i = 0; i < t.n_points; ++i) {
    const double s = t.s_values[i];
    const double bound = (1.0 + s * s) * std::abs(q_profile_derivative(s));
    if (bound > 0.0) c = std::max(c, std::abs(t.values[i]) / bound);
  }
  return c;
}

/// CSV with header `s,value,derivative`.
inline void write_csv(std::ostream& os, const ProfileTable& t) {
  const auto old_precision = os.precision(17);
  os << "s,value,derivative\n";
  for (std::size_t i = 0; i < t.n_points; ++i) {
    os << t.s_values[i] << ',' << t.values[i] << ',' << t.derivative[i] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace pfmcf
