#pragma once

#include <cmath>

namespace pfmcf {

/// Double-well potential W(s) = s²(1-s)²/2 with wells at 0 and 1.
///
/// All functions are total on the reals: the explicit reaction step can push
/// values slightly outside [0,1] and those must evaluate without clamping.
struct PotentialModel {
  /// c_W = ∫₀¹ √(2W(s)) ds.
  static constexpr double cw = 1.0 / 6.0;
  /// M = (sup_{[0,1]} W'')⁻¹. W'' peaks at the wells where it equals 1.
  static constexpr double stability_m = 1.0;

  static constexpr double w(double s) noexcept {
    const double a = s * (1.0 - s);
    return 0.5 * a * a;
  }

  static constexpr double w_prime(double s) noexcept { return s * (1.0 - s) * (1.0 - 2.0 * s); }

  static constexpr double w_second(double s) noexcept { return 6.0 * s * s - 6.0 * s + 1.0; }

  /// √(2W(s)) evaluated as |s(1-s)|, never through a square root.
  static constexpr double sqrt_two_w(double s) noexcept {
    const double a = s * (1.0 - s);
    return a < 0.0 ? -a : a;
  }

  /// G(s) = ∫₀ˢ |t(1-t)| dt in closed form.
  static constexpr double g_antiderivative(double s) noexcept {
    // P(s) = s²/2 - s³/3 is the antiderivative of t(1-t); the sign of t(1-t)
    // flips outside [0,1].
    constexpr auto poly = [](double x) { return x * x / 2.0 - x * x * x / 3.0; };
    if (s < 0.0) return -poly(s);
    if (s <= 1.0) return poly(s);
    return 2.0 * poly(1.0) - poly(s);
  }
};

// Free-function spellings for call sites that don't want the struct prefix.
constexpr double w(double s) noexcept { return PotentialModel::w(s); }
constexpr double w_prime(double s) noexcept { return PotentialModel::w_prime(s); }
constexpr double w_second(double s) noexcept { return PotentialModel::w_second(s); }
constexpr double sqrt_two_w(double s) noexcept { return PotentialModel::sqrt_two_w(s); }
constexpr double g_antiderivative(double s) noexcept { return PotentialModel::g_antiderivative(s); }

}  // namespace pfmcf
