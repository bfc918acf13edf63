#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pfmcf/error.hpp"
#include "pfmcf/field.hpp"
#include "pfmcf/reaction.hpp"

namespace pfmcf {

struct Ray {
  Point origin{0.0, 0.0, 0.0};
  Point direction{1.0, 0.0, 0.0};
};

struct Observation {
  double time = 0.0;
  double mass = 0.0;
  /// Measure of {u >= 1/2} as a fraction of the unit box.
  double volume_threshold = 0.0;
  std::vector<double> radii;
  /// NaN when the √(2W) denominator is degenerate.
  double g_eps = std::numeric_limits<double>::quiet_NaN();
  double g_tilde_eps = std::numeric_limits<double>::quiet_NaN();
  double max_u = 0.0;
  double min_u = 0.0;
};

/// Distance from `origin` to the first 1/2-crossing of u along `direction`,
/// walking in steps of h and interpolating linearly inside the bracketing
/// pair. Returns 0 when u(origin) < 1/2 or no crossing is found.
inline double radius_along_ray(const ScalarField& u, const Point& origin, const Point& direction) {
  const double norm = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                                direction[2] * direction[2]);
  if (!(norm > 0.0)) throw std::invalid_argument("ray direction must be non-zero");
  const double h = u.grid.h();
  const auto at = [&](double r) {
    Point x = origin;
    for (int k = 0; k < 3; ++k) x[k] += r * direction[k] / norm;
    return sample(u, x) - 0.5;
  };
  double prev = at(0.0);
  if (prev < 0.0) return 0.0;
  // A full box diagonal is enough to leave any shape.
  const int max_steps = static_cast<int>(std::ceil(std::sqrt(3.0) / h));
  for (int k = 1; k <= max_steps; ++k) {
    const double cur = at(k * h);
    if (cur < 0.0) return (k - 1) * h + h * prev / (prev - cur);
    prev = cur;
  }
  return 0.0;
}

inline double radius_along_ray(const ScalarField& u, const Ray& ray) {
  return radius_along_ray(u, ray.origin, ray.direction);
}

/// Measure of {u >= 1/2} with an axis-wise linear sub-cell correction.
///
/// A cell whose axis neighbours are all on its own side counts 0 or 1. Otherwise,
/// along every axis with a sign change the cell is split into two half-cells,
/// the linear interpolant toward each neighbour gives the fraction of that half
/// above 1/2, and the per-axis fractions are averaged.
inline double volume_threshold(const ScalarField& u) {
  const auto p = static_cast<std::size_t>(u.grid.p);
  const int dim = u.grid.dim;
  const std::size_t n = u.size();
  std::vector<double> contributions(n);

  // Fraction of the half cell [0, 1/2] (in units of h) toward a neighbour that
  // lies on the {u >= 1/2} side.
  const auto half_fraction = [](double v, double nb) {
    const bool in_v = v >= 0.5, in_nb = nb >= 0.5;
    if (in_v == in_nb) return in_v ? 0.5 : 0.0;
    const double t = (0.5 - v) / (nb - v);  // crossing, in units of h
    const double own = std::min(t, 0.5);    // part of the half cell on v's side
    return in_v ? own : 0.5 - own;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double v = u[i];
    const bool inside = v >= 0.5;
    double sum = 0.0;
    int crossing_axes = 0;
    std::size_t stride = 1;
    for (int k = dim - 1; k >= 0; --k) {
      const std::size_t coord = (i / stride) % p;
      const std::size_t base = i - coord * stride;
      const double lo = u[base + ((coord + p - 1) % p) * stride];
      const double hi = u[base + ((coord + 1) % p) * stride];
      if ((lo >= 0.5) != inside || (hi >= 0.5) != inside) {
        sum += half_fraction(v, lo) + half_fraction(v, hi);
        ++crossing_axes;
      }
      stride *= p;
    }
    contributions[i] = crossing_axes == 0 ? (inside ? 1.0 : 0.0) : sum / crossing_axes;
  }
  return compensated_sum(contributions) / static_cast<double>(n);
}

inline Observation measure(const ScalarField& u, const ScalarField& g, double eps,
                           const std::vector<Ray>& rays, double time = 0.0) {
  Observation obs;
  obs.time = time;
  obs.mass = integrate(u);
  obs.volume_threshold = volume_threshold(u);
  obs.radii.reserve(rays.size());
  for (const auto& r : rays) obs.radii.push_back(radius_along_ray(u, r));
  try {
    const auto m = multiplier_values(u, g, eps);
    obs.g_eps = m.g_eps;
    obs.g_tilde_eps = m.g_tilde_eps;
  } catch (const DegenerateError&) {
  }
  obs.max_u = u.max();
  obs.min_u = u.min();
  return obs;
}

/// 17 significant digits, so values round-trip exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_observation_header(std::ostream& os, std::size_t n_rays) {
  os << "time,mass,volume";
  for (std::size_t k = 0; k < n_rays; ++k) os << ",r" << k;
  os << ",g_eps,g_tilde_eps,max_u,min_u\n";
}

inline void write_observation_row(std::ostream& os, const Observation& o) {
  os << format_double(o.time) << ',' << format_double(o.mass) << ','
     << format_double(o.volume_threshold);
  for (double r : o.radii) os << ',' << format_double(r);
  os << ',' << format_double(o.g_eps) << ',' << format_double(o.g_tilde_eps) << ','
     << format_double(o.max_u) << ',' << format_double(o.min_u) << '\n';
}

}  // namespace pfmcf
