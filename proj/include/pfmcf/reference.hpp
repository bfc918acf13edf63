#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "pfmcf/observables.hpp"

namespace pfmcf {

/// Classical fourth-order Runge-Kutta step for y' = f(t, y).
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const Rhs& f, double t, const std::array<double, N>& y, double h) {
  const auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
    return r;
  };
  const auto k1 = f(t, y);
  const auto k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const auto k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const auto k4 = f(t + h, axpy(y, h, k3));
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Fixed-step RK4 from t0 to t1; the last step is shortened to land on t1.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_integrate(const Rhs& f, std::array<double, N> y, double t0, double t1,
                                    double step) {
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / step - 1e-9));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * step;
    y = rk4_step(f, t, y, std::min(step, t1 - t));
  }
  return y;
}

/// Sharp-interface circle: dR/dt = -1/R + c_g.
struct CircleLaw {
  double r0 = 0.25;
  double cg = 0.0;
};

/// Two circles under volume-preserving flow:
///   dr/dt = -1/r + 2/(r+R),  dR/dt = -1/R + 2/(r+R).
struct TwoCircleLaw {
  double r0 = 0.1;
  double R0 = 0.15;
};

inline constexpr double reference_rk4_step = 1e-6;

namespace detail {

inline void check_law(const CircleLaw& law) {
  if (!(law.r0 > 0.0)) throw std::invalid_argument("circle law needs r0 > 0");
}

inline void check_law(const TwoCircleLaw& law) {
  if (!(law.r0 > 0.0) || !(law.R0 > law.r0)) {
    throw std::invalid_argument("two-circle law needs 0 < r0 < R0");
  }
}

// Both laws are integrated in squared radii, which stay smooth up to extinction
// (d(r²)/dt -> -2 as r -> 0) where dr/dt itself blows up.

inline auto circle_rhs(double cg) {
  return [cg](double, const std::array<double, 1>& y) {
    return std::array<double, 1>{-2.0 + 2.0 * cg * std::sqrt(std::max(y[0], 0.0))};
  };
}

inline std::array<double, 2> two_circle_rhs(double, const std::array<double, 2>& y) {
  const double r = std::sqrt(std::max(y[0], 0.0));
  const double R = std::sqrt(std::max(y[1], 0.0));
  const double s = r + R;
  return {-2.0 + 4.0 * r / s, -2.0 + 4.0 * R / s};
}

struct TwoCircleEvent {
  double time;
  std::array<double, 2> squared_radii;
};

/// Steps until r² changes sign, then bisects the last step length.
inline TwoCircleEvent two_circle_event(const TwoCircleLaw& law, double step = reference_rk4_step) {
  std::array<double, 2> y{law.r0 * law.r0, law.R0 * law.R0};
  double t = 0.0;
  for (;;) {
    const auto next = rk4_step(two_circle_rhs, t, y, step);
    if (next[0] > 0.0) {
      y = next;
      t += step;
      continue;
    }
    double lo = 0.0, hi = step;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (rk4_step(two_circle_rhs, t, y, mid)[0] > 0.0 ? lo : hi) = mid;
    }
    auto at = rk4_step(two_circle_rhs, t, y, hi);
    at[0] = 0.0;
    return {t + hi, at};
  }
}

}  // namespace detail

/// Closed-form extinction time of a shrinking circle (requires c_g < 1/r0).
inline double circle_extinction_time(const CircleLaw& law) {
  detail::check_law(law);
  const double c = law.cg, r0 = law.r0;
  if (!(c * r0 < 1.0)) throw std::domain_error("circle does not shrink: need cg < 1/r0");
  const double x = c * r0;
  if (std::abs(x) < 0.1) {
    // t = ∫₀^{r0} R/(1 - cR) dR = r0² Σ xⁿ/(n+2); avoids cancellation as c -> 0.
    double sum = 0.0, power = 1.0;
    for (int n = 0; n < 40; ++n) {
      sum += power / (n + 2);
      power *= x;
    }
    return r0 * r0 * sum;
  }
  return -(1.0 / c) * ((1.0 / c) * std::log(1.0 - x) + r0);
}

/// R(t): closed form for c_g = 0, otherwise RK4 (step 1e-6) on R². Returns 0
/// once R <= 1e-4. Throws std::domain_error past extinction.
inline double circle_radius(const CircleLaw& law, double t) {
  detail::check_law(law);
  if (t < 0.0) throw std::domain_error("negative time");
  if (law.cg == 0.0) {
    const double y = law.r0 * law.r0 - 2.0 * t;
    if (y < -1e-15) throw std::domain_error("time is past extinction");
    return std::sqrt(std::max(y, 0.0));
  }
  if (law.cg * law.r0 < 1.0 && t > circle_extinction_time(law) + 1e-9) {
    throw std::domain_error("time is past extinction");
  }
  constexpr double cutoff = 1e-4 * 1e-4;
  const auto f = detail::circle_rhs(law.cg);
  std::array<double, 1> y{law.r0 * law.r0};
  double s = 0.0;
  while (s < t) {
    const double h = std::min(reference_rk4_step, t - s);
    y = rk4_step(f, s, y, h);
    s += h;
    if (y[0] <= cutoff) return 0.0;
  }
  return std::sqrt(y[0]);
}

/// Closed-form time at which the smaller circle vanishes.
inline double two_circle_extinction_time(const TwoCircleLaw& law) {
  detail::check_law(law);
  const double r0 = law.r0, R0 = law.R0;
  const double gap = R0 - r0;
  return -r0 * R0 / 2.0 + (R0 * R0 + r0 * r0) / 4.0 * std::log1p(2.0 * r0 * R0 / (gap * gap));
}

/// Small-circle vanishing time located on the RK4 trajectory.
inline double two_circle_extinction_time_rk4(const TwoCircleLaw& law) {
  detail::check_law(law);
  return detail::two_circle_event(law).time;
}

/// Radii R* of the surviving circle: √(r0² + R0²).
inline double two_circle_final_radius(const TwoCircleLaw& law) {
  return std::sqrt(law.r0 * law.r0 + law.R0 * law.R0);
}

/// (r(t), R(t)) by RK4 with step 1e-6. At or just past the vanishing time
/// (within 1e-5, the closed-form/RK4 agreement band) returns (0, R*).
inline std::pair<double, double> two_circle_solution(const TwoCircleLaw& law, double t) {
  detail::check_law(law);
  if (t < 0.0) throw std::domain_error("negative time");
  const auto event = detail::two_circle_event(law);
  if (t >= event.time) {
    if (t - event.time > 1e-5) throw std::domain_error("time is past small-circle extinction");
    return {0.0, std::sqrt(event.squared_radii[1])};
  }
  const auto y = rk4_integrate(detail::two_circle_rhs,
                               std::array<double, 2>{law.r0 * law.r0, law.R0 * law.R0}, 0.0, t,
                               reference_rk4_step);
  return {std::sqrt(std::max(y[0], 0.0)), std::sqrt(y[1])};
}

/// `time,r,R` samples of the two-circle trajectory up to the vanishing time.
inline void write_reference_csv(std::ostream& os, const TwoCircleLaw& law, int samples = 200) {
  detail::check_law(law);
  const auto event = detail::two_circle_event(law);
  os << "time,r,R\n";
  std::array<double, 2> y{law.r0 * law.r0, law.R0 * law.R0};
  double t = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double target = event.time * k / samples;
    if (k == samples) {
      y = event.squared_radii;
    } else {
      y = rk4_integrate(detail::two_circle_rhs, y, t, target, reference_rk4_step);
    }
    t = target;
    os << format_double(t) << ',' << format_double(std::sqrt(std::max(y[0], 0.0))) << ','
       << format_double(std::sqrt(y[1])) << '\n';
  }
}

}  // namespace pfmcf
