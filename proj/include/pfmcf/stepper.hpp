#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "pfmcf/error.hpp"
#include "pfmcf/field.hpp"
#include "pfmcf/potential.hpp"
#include "pfmcf/reaction.hpp"

namespace pfmcf {

struct SimConfig {
  GridSpec grid{2, 256};
  double eps = 2.0 / 256.0;
  double dt = 1.0 / (256.0 * 256.0);
  double t_end = 0.0;
  ReactionFormId form = ReactionFormId::classic_forced;
  ForcingSpec forcing = NoForcing{};
  ShapeSpec shape = Circle{};
  int observe_every = 1;
  bool stop_on_extinction = false;
  /// When set, extinction means u < 1/2 at this point (a tracked component
  /// vanished) rather than max(u) < 1/2.
  std::optional<Point> extinction_probe;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const {
    grid.validate();
    if (!(eps > 0.0)) throw ConfigError("eps", "must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end", "must be non-negative");
    if (observe_every < 1) throw ConfigError("observe_every", "must be >= 1");
    const double limit = PotentialModel::stability_m * eps * eps;
    if (dt > limit * (1.0 + 1e-12)) {
      throw ConfigError("dt <= M*eps^2", "dt = " + std::to_string(dt) +
                                             " exceeds the stability limit " + std::to_string(limit));
    }
    if (eps < 1.5 * grid.h()) {
      throw ConfigError("eps >= 1.5*h", "eps = " + std::to_string(eps) +
                                            " under-resolves the interface on h = " +
                                            std::to_string(grid.h()));
    }
    check_shape(shape, grid.dim, eps);
  }
};

enum class Termination { reached_t_end, extinct, degenerate };

inline constexpr std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::extinct: return "extinct";
    case Termination::degenerate: return "degenerate";
  }
  return "?";
}

struct SimState {
  ScalarField u;
  double time = 0.0;
  std::int64_t step_index = 0;
  std::optional<Termination> terminated;
  /// Extinction time refined by linear interpolation of the indicator
  /// between the last step where it was >= 0 and the first where it is not.
  std::optional<double> extinction_time;
};

/// True iff no super-level set {u >= 1/2} remains.
inline bool detect_extinction(const ScalarField& u) { return u.max() < 0.5; }

/// Lie-splitting integrator: exact heat step in Fourier space, then one
/// explicit Euler reaction step evaluated at the post-diffusion field.
class Stepper {
public:
  explicit Stepper(const SimConfig& cfg)
      : cfg_(cfg), diffusion_(cfg.grid, cfg.dt), forcing_(eval_forcing(cfg.forcing, cfg.grid)) {
    cfg.validate();
  }

  const SimConfig& config() const { return cfg_; }
  const ScalarField& forcing() const { return forcing_; }

  SimState initial_state() const {
    SimState s;
    s.u = init_phase_field(cfg_.grid, cfg_.shape, cfg_.eps);
    return s;
  }

  /// Signed extinction indicator; negative once the tracked component is gone.
  double extinction_indicator(const ScalarField& u) const {
    if (cfg_.extinction_probe) return sample(u, *cfg_.extinction_probe) - 0.5;
    return u.max() - 0.5;
  }

  /// Advances one step. A degenerate nonlocal term leaves the field untouched
  /// and marks the state terminated.
  void step(SimState& state) {
    if (state.terminated) throw std::logic_error("step called on a terminated state");
    ScalarField next = state.u;
    diffusion_.apply(next);
    ScalarField f;
    try {
      f = eval_reaction(cfg_.form, next, forcing_, cfg_.eps);
    } catch (const DegenerateError&) {
      state.terminated = Termination::degenerate;
      return;
    }
    const double rate = cfg_.dt / (cfg_.eps * cfg_.eps);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= rate * f[i];
    state.u = std::move(next);
    ++state.step_index;
    state.time = static_cast<double>(state.step_index) * cfg_.dt;
  }

  using Observer = std::function<void(const SimState&)>;

  /// Runs until t_end or termination. The observer sees the initial state,
  /// every observe_every-th step, and the final state.
  SimState run(const Observer& observer) { return run_from(initial_state(), observer); }

  /// As run(), starting from a caller-supplied state instead of the shape.
  SimState run_from(SimState state, const Observer& observer) {
    if (!(state.u.grid == cfg_.grid)) throw std::invalid_argument("state grid differs from config");
    const auto n_steps = cfg_.t_end <= 0.0
                             ? std::int64_t{0}
                             : static_cast<std::int64_t>(std::ceil(cfg_.t_end / cfg_.dt - 1e-9));
    if (observer) observer(state);
    std::int64_t last_observed = 0;
    double previous = extinction_indicator(state.u);

    while (state.step_index < n_steps && !state.terminated) {
      step(state);
      if (state.terminated) break;
      const double current = extinction_indicator(state.u);
      if (!state.extinction_time && previous >= 0.0 && current < 0.0) {
        state.extinction_time = state.time - cfg_.dt + cfg_.dt * previous / (previous - current);
        if (cfg_.stop_on_extinction) state.terminated = Termination::extinct;
      }
      previous = current;
      if (state.terminated) break;
      if (observer && state.step_index % cfg_.observe_every == 0) {
        observer(state);
        last_observed = state.step_index;
      }
    }
    if (!state.terminated) state.terminated = Termination::reached_t_end;
    if (observer && last_observed != state.step_index) observer(state);
    return state;
  }

private:
  SimConfig cfg_;
  SpectralDiffusion diffusion_;
  ScalarField forcing_;
};

/// Single step from an arbitrary state. Builds FFT plans per call.
inline SimState step(SimState state, const SimConfig& cfg) {
  Stepper stepper(cfg);
  stepper.step(state);
  return state;
}

inline SimState run(const SimConfig& cfg, const Stepper::Observer& observer = {}) {
  Stepper stepper(cfg);
  return stepper.run(observer);
}

}  // namespace pfmcf
