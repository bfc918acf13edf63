#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pfmcf/error.hpp"
#include "pfmcf/profile.hpp"

namespace pfmcf {

using Point = std::array<double, 3>;

/// Uniform periodic grid on Q = [-1/2, 1/2]^dim with P cells per axis.
struct GridSpec {
  int dim = 2;
  int p = 64;

  double h() const { return 1.0 / static_cast<double>(p); }
  std::size_t size() const {
    std::size_t n = 1;
    for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(p);
    return n;
  }
  /// log2(P); only meaningful for valid grids.
  int log2_p() const {
    int l = 0;
    while ((1 << l) < p) ++l;
    return l;
  }

  void validate() const {
    if (dim != 2 && dim != 3) throw ConfigError("grid.dim", "must be 2 or 3, got " + std::to_string(dim));
    if (p < 8 || (p & (p - 1)) != 0) {
      throw ConfigError("grid.p", "must be a power of two >= 8, got " + std::to_string(p));
    }
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cell-centred samples, row-major with the last axis fastest.
struct ScalarField {
  GridSpec grid;
  std::vector<double> data;

  ScalarField() = default;
  explicit ScalarField(GridSpec g, double value = 0.0) : grid(g), data(g.size(), value) {}

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  /// Cell centre x_i = -1/2 + (i + 1/2) h of a flat index. Unused axes are 0.
  Point cell_center(std::size_t flat) const {
    Point x{0.0, 0.0, 0.0};
    const auto p = static_cast<std::size_t>(grid.p);
    const double h = grid.h();
    for (int k = grid.dim - 1; k >= 0; --k) {
      x[k] = -0.5 + (static_cast<double>(flat % p) + 0.5) * h;
      flat /= p;
    }
    return x;
  }

  double max() const { return *std::max_element(data.begin(), data.end()); }
  double min() const { return *std::min_element(data.begin(), data.end()); }
};

// ---------------------------------------------------------------------------
// Shapes and signed distance (negative inside).

struct Circle {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.25;
};

struct CircleUnion {
  std::vector<Circle> circles;
};

/// Torus with symmetry axis along the last coordinate.
struct Torus {
  Point center{0.0, 0.0, 0.0};
  double major_radius = 0.25;
  double minor_radius = 0.1;
};

/// Circle in 2D, sphere in 3D.
using ShapeSpec = std::variant<Circle, CircleUnion, Torus>;

inline double signed_distance(const Circle& c, const Point& x) {
  const double dx = x[0] - c.center[0], dy = x[1] - c.center[1], dz = x[2] - c.center[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz) - c.radius;
}

inline double signed_distance(const CircleUnion& u, const Point& x) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : u.circles) d = std::min(d, signed_distance(c, x));
  return d;
}

inline double signed_distance(const Torus& t, const Point& x) {
  const double dx = x[0] - t.center[0], dy = x[1] - t.center[1], dz = x[2] - t.center[2];
  const double ring = std::sqrt(dx * dx + dy * dy) - t.major_radius;
  return std::sqrt(ring * ring + dz * dz) - t.minor_radius;
}

inline double signed_distance(const ShapeSpec& shape, const Point& x) {
  return std::visit([&](const auto& s) { return signed_distance(s, x); }, shape);
}

namespace detail {

/// Smallest distance from the shape to the box faces over the first `dim` axes.
inline double box_clearance(const Circle& c, int dim) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dim; ++k) m = std::min(m, 0.5 - (std::abs(c.center[k]) + c.radius));
  return m;
}
inline double box_clearance(const CircleUnion& u, int dim) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : u.circles) m = std::min(m, box_clearance(c, dim));
  return m;
}
inline double box_clearance(const Torus& t, int dim) {
  const double outer = t.major_radius + t.minor_radius;
  double m = std::min(0.5 - (std::abs(t.center[0]) + outer), 0.5 - (std::abs(t.center[1]) + outer));
  if (dim == 3) m = std::min(m, 0.5 - (std::abs(t.center[2]) + t.minor_radius));
  return m;
}

inline void validate_shape(const Circle& c) {
  if (!(c.radius > 0.0)) throw ConfigError("shape.radius", "must be positive");
}
inline void validate_shape(const CircleUnion& u) {
  if (u.circles.empty()) throw ConfigError("shape.circles", "union needs at least one circle");
  for (const auto& c : u.circles) validate_shape(c);
}
inline void validate_shape(const Torus& t) {
  if (!(t.minor_radius > 0.0) || !(t.major_radius > t.minor_radius)) {
    throw ConfigError("shape.torus", "need 0 < minor_radius < major_radius");
  }
}

}  // namespace detail

/// Distance from the shape to ∂Q; negative when it sticks out.
inline double box_clearance(const ShapeSpec& shape, int dim) {
  return std::visit([&](const auto& s) { return detail::box_clearance(s, dim); }, shape);
}

/// Throws ConfigError unless the shape is well formed and stays 4ε away from ∂Q.
inline void check_shape(const ShapeSpec& shape, int dim, double eps) {
  std::visit([](const auto& s) { detail::validate_shape(s); }, shape);
  if (std::holds_alternative<Torus>(shape) && dim != 3) {
    throw ConfigError("shape.torus", "torus requires dim = 3");
  }
  const double clearance = box_clearance(shape, dim);
  if (clearance < 4.0 * eps) {
    throw ConfigError("shape.clearance", "shape must stay 4*eps = " + std::to_string(4.0 * eps) +
                                             " inside the box; margin is " +
                                             std::to_string(clearance));
  }
}

/// u₀(x) = q(d(x)/ε) at every cell centre.
inline ScalarField init_phase_field(const GridSpec& grid, const ShapeSpec& shape, double eps) {
  grid.validate();
  if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
  check_shape(shape, grid.dim, eps);
  ScalarField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = q_profile(signed_distance(shape, u.cell_center(i)) / eps);
  }
  return u;
}

/// Largest jump |u(first cell) - u(last cell)| across any periodic seam. The
/// signed distance is not periodic, so this is the size of the mismatch the
/// periodic solver sees at t = 0.
inline double periodic_seam_jump(const ScalarField& u) {
  const auto p = static_cast<std::size_t>(u.grid.p);
  const std::size_t n = u.size();
  double jump = 0.0;
  std::size_t stride = 1;
  for (int k = u.grid.dim - 1; k >= 0; --k) {
    for (std::size_t i = 0; i < n; ++i) {
      if ((i / stride) % p != 0) continue;
      jump = std::max(jump, std::abs(u[i] - u[i + (p - 1) * stride]));
    }
    stride *= p;
  }
  return jump;
}

/// Compensated (Neumaier) sum in index order.
inline double compensated_sum(std::span<const double> v) {
  double sum = 0.0, c = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  return sum + c;
}

/// Midpoint quadrature h^dim Σ u over the unit box.
inline double integrate(const ScalarField& u) {
  return compensated_sum(u.data) / static_cast<double>(u.size());
}

/// Periodic multilinear interpolation at an arbitrary point.
inline double sample(const ScalarField& u, const Point& x) {
  const int p = u.grid.p;
  std::array<int, 3> i0{0, 0, 0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
  for (int k = 0; k < u.grid.dim; ++k) {
    const double pos = (x[k] + 0.5) * p - 0.5;
    const double fl = std::floor(pos);
    t[k] = pos - fl;
    i0[k] = static_cast<int>(fl);
  }
  const auto wrap = [p](int i) { return ((i % p) + p) % p; };
  double acc = 0.0;
  const int corners = 1 << u.grid.dim;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < u.grid.dim; ++k) {
      const int bit = (c >> k) & 1;
      weight *= bit ? t[k] : 1.0 - t[k];
      flat = flat * static_cast<std::size_t>(p) + static_cast<std::size_t>(wrap(i0[k] + bit));
    }
    acc += weight * u[flat];
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Exact heat-semigroup step in Fourier space.

namespace detail {

/// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// Applies û_p ← û_p exp(-4π² dt |p|²) for a fixed grid and time step.
///
/// Owns its FFTW plans and aligned buffers; not copyable, one per simulation.
class SpectralDiffusion {
public:
  SpectralDiffusion(const GridSpec& grid, double dt) : grid_(grid), dt_(dt) {
    grid.validate();
    const int p = grid.p;
    n_real_ = grid.size();
    n_complex_ = n_real_ / static_cast<std::size_t>(p) * static_cast<std::size_t>(p / 2 + 1);
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n_real_)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_complex_)));
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      std::array<int, 3> dims{p, p, p};
      forward_ = fftw_plan_dft_r2c(grid.dim, dims.data(), real_.get(), spec_.get(), FFTW_ESTIMATE);
      backward_ = fftw_plan_dft_c2r(grid.dim, dims.data(), spec_.get(), real_.get(), FFTW_ESTIMATE);
    }
    if (forward_ == nullptr || backward_ == nullptr) throw SolverError("FFTW planning failed");
    build_multiplier();
  }

  SpectralDiffusion(const SpectralDiffusion&) = delete;
  SpectralDiffusion& operator=(const SpectralDiffusion&) = delete;

  ~SpectralDiffusion() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }

  /// In-place diffusion of `u` over one time step.
  void apply(ScalarField& u) {
    assert(u.grid == grid_);
    std::copy(u.data.begin(), u.data.end(), real_.get());
    fftw_execute(forward_);
    // Multiplier already carries the 1/N normalisation of the unnormalised c2r.
    for (std::size_t i = 0; i < n_complex_; ++i) {
      spec_.get()[i][0] *= multiplier_[i];
      spec_.get()[i][1] *= multiplier_[i];
    }
    fftw_execute(backward_);
    std::copy(real_.get(), real_.get() + n_real_, u.data.begin());
  }

  /// Forward then inverse transform with no multiplier; used by round-trip checks.
  static ScalarField round_trip(const ScalarField& u) {
    SpectralDiffusion op(u.grid, 0.0);
    ScalarField out = u;
    op.apply(out);
    return out;
  }

private:
  /// Signed mode number for an FFT index; the Nyquist index maps to -P/2.
  static int mode(int index, int p) { return index < p / 2 ? index : index - p; }

  void build_multiplier() {
    const int p = grid_.p;
    const int half = p / 2 + 1;
    const double norm = 1.0 / static_cast<double>(n_real_);
    const double rate = 4.0 * std::numbers::pi * std::numbers::pi * dt_;
    multiplier_.resize(n_complex_);
    std::size_t i = 0;
    if (grid_.dim == 2) {
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < half; ++b) {
          const double k2 = std::pow(mode(a, p), 2) + std::pow(mode(b, p), 2);
          multiplier_[i++] = std::exp(-rate * k2) * norm;
        }
      }
    } else {
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
          for (int c = 0; c < half; ++c) {
            const double k2 =
                std::pow(mode(a, p), 2) + std::pow(mode(b, p), 2) + std::pow(mode(c, p), 2);
            multiplier_[i++] = std::exp(-rate * k2) * norm;
          }
        }
      }
    }
  }

  GridSpec grid_;
  double dt_;
  std::size_t n_real_ = 0;
  std::size_t n_complex_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::vector<double> multiplier_;
};

/// One exact heat step of length dt. Plans are built per call; long runs
/// should hold a SpectralDiffusion instead.
inline ScalarField diffusion_half_step(const ScalarField& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("diffusion step needs dt > 0");
  SpectralDiffusion op(u.grid, dt);
  ScalarField out = u;
  op.apply(out);
  return out;
}

}  // namespace pfmcf
