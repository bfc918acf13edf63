#include <gtest/gtest.h>

#include <cmath>

#include "pfmcf/stepper.hpp"

using namespace pfmcf;

namespace {

SimConfig circle_config(int p, double t_end, ReactionFormId form = ReactionFormId::classic_forced) {
  SimConfig cfg;
  cfg.grid = GridSpec{2, p};
  cfg.eps = 2.0 / p;
  cfg.dt = 1.0 / (static_cast<double>(p) * p);
  cfg.t_end = t_end;
  cfg.form = form;
  cfg.shape = Circle{{0, 0, 0}, 0.25};
  return cfg;
}

SimState constant_state(const GridSpec& g, double v) {
  SimState s;
  s.u = ScalarField(g, v);
  return s;
}

}  // namespace

TEST(SimConfig, Validation) {
  auto cfg = circle_config(64, 0.01);
  EXPECT_NO_THROW(cfg.validate());

  cfg.dt = 1.01 * cfg.eps * cfg.eps;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.invariant(), "dt <= M*eps^2");
  }
  cfg.dt = cfg.eps * cfg.eps;  // exactly at the limit is allowed
  EXPECT_NO_THROW(cfg.validate());

  cfg = circle_config(64, 0.01);
  cfg.eps = 1.4 / 64;
  cfg.dt = 0.5 * cfg.eps * cfg.eps;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.invariant(), "eps >= 1.5*h");
  }

  cfg = circle_config(64, 0.01);
  cfg.observe_every = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = circle_config(64, 0.01);
  cfg.shape = Circle{{0.4, 0, 0}, 0.05};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Step, PureZeroIsFixedPoint) {
  auto cfg = circle_config(32, 1.0);
  Stepper stepper(cfg);
  auto s = constant_state(cfg.grid, 0.0);
  stepper.step(s);
  for (double v : s.u.data) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.step_index, 1);
  EXPECT_DOUBLE_EQ(s.time, cfg.dt);
}

TEST(Step, PureOneUnderConservedForms) {
  auto cfg = circle_config(32, 1.0, ReactionFormId::classic_conserved);
  {
    Stepper stepper(cfg);
    auto s = constant_state(cfg.grid, 1.0);
    stepper.step(s);
    for (double v : s.u.data) EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_FALSE(s.terminated);
  }
  // The modified conserved form has no interface to weight; the field is left
  // untouched and the run reports a degenerate termination.
  cfg.form = ReactionFormId::modified_conserved;
  Stepper stepper(cfg);
  auto s = constant_state(cfg.grid, 1.0);
  stepper.step(s);
  for (double v : s.u.data) EXPECT_EQ(v, 1.0);
  ASSERT_TRUE(s.terminated);
  EXPECT_EQ(*s.terminated, Termination::degenerate);
  EXPECT_THROW(stepper.step(s), std::logic_error);
}

TEST(Step, ShrinkingCircleLosesMass) {
  const auto cfg = circle_config(256, 1.0);
  Stepper stepper(cfg);
  auto s = stepper.initial_state();
  const double before = integrate(s.u);
  s = step(s, cfg);
  EXPECT_LT(integrate(s.u), before);
}

TEST(Run, ZeroEndTimeObservesOnce) {
  const auto cfg = circle_config(32, 0.0);
  int calls = 0;
  const auto s = run(cfg, [&](const SimState& st) {
    ++calls;
    EXPECT_EQ(st.step_index, 0);
  });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(s.step_index, 0);
  EXPECT_EQ(*s.terminated, Termination::reached_t_end);
}

TEST(Run, ObserverCadence) {
  auto cfg = circle_config(32, 10.5 / (32.0 * 32.0));  // 11 steps
  cfg.observe_every = 4;
  std::vector<std::int64_t> seen;
  const auto s = run(cfg, [&](const SimState& st) { seen.push_back(st.step_index); });
  EXPECT_EQ(s.step_index, 11);
  EXPECT_EQ(seen, (std::vector<std::int64_t>{0, 4, 8, 11}));
  EXPECT_DOUBLE_EQ(s.time, 11 * cfg.dt);
}

TEST(Run, PurePhaseStaysPut) {
  const auto cfg = circle_config(32, 0.01);
  Stepper stepper(cfg);
  const auto s = stepper.run_from(constant_state(cfg.grid, 1.0), {});
  EXPECT_EQ(*s.terminated, Termination::reached_t_end);
  EXPECT_GE(s.time, cfg.t_end);
  for (double v : s.u.data) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Run, ShrinkingCircleGoesExtinct) {
  auto cfg = circle_config(256, 0.04);
  cfg.stop_on_extinction = true;
  const auto s = run(cfg);
  ASSERT_TRUE(s.terminated);
  EXPECT_EQ(*s.terminated, Termination::extinct);
  ASSERT_TRUE(s.extinction_time);
  EXPECT_NEAR(*s.extinction_time, 0.03125, 5e-3);
  EXPECT_LE(*s.extinction_time, s.time);
  EXPECT_GT(*s.extinction_time, s.time - cfg.dt);
  EXPECT_TRUE(detect_extinction(s.u));
}

TEST(Extinction, Detection) {
  const GridSpec g{2, 32};
  EXPECT_TRUE(detect_extinction(ScalarField(g, 0.0)));
  EXPECT_FALSE(detect_extinction(ScalarField(g, 1.0)));
  EXPECT_FALSE(detect_extinction(init_phase_field(g, Circle{{0, 0, 0}, 0.2}, 2.0 / 32)));
}

TEST(Extinction, ProbeTracksSmallComponent) {
  SimConfig cfg = circle_config(128, 0.02, ReactionFormId::modified_conserved);
  cfg.shape = CircleUnion{{Circle{{-0.22, 0, 0}, 0.1}, Circle{{0.18, 0, 0}, 0.15}}};
  cfg.extinction_probe = Point{-0.22, 0, 0};
  cfg.stop_on_extinction = true;
  const auto s = run(cfg);
  ASSERT_EQ(*s.terminated, Termination::extinct);
  EXPECT_NEAR(*s.extinction_time, 0.01334, 2e-3);
  EXPECT_FALSE(detect_extinction(s.u));  // the large circle survives
}

TEST(Properties, LInfinityStability) {
  auto cfg = circle_config(64, 400.0 / (64.0 * 64.0) * 4);
  cfg.dt = PotentialModel::stability_m * cfg.eps * cfg.eps;
  cfg.shape = CircleUnion{{Circle{{-0.2, 0.1, 0}, 0.12}, Circle{{0.15, -0.1, 0}, 0.2}}};
  double lo = 0.0, hi = 1.0;
  run(cfg, [&](const SimState& s) {
    lo = std::min(lo, s.u.min());
    hi = std::max(hi, s.u.max());
  });
  EXPECT_GE(lo, 0.0);
  EXPECT_LE(hi, 1.0);
}

TEST(Properties, ComparisonPrinciple) {
  auto cfg = circle_config(64, 0.01, ReactionFormId::modified_forced);
  cfg.forcing = RadialCosineForcing{2.0, 8.0};
  Stepper lower(cfg), upper(cfg);
  SimState v = lower.initial_state();
  cfg.shape = Circle{{0, 0, 0}, 0.28};
  SimState u = Stepper(cfg).initial_state();
  for (std::size_t i = 0; i < u.u.size(); ++i) ASSERT_GE(u.u[i], v.u[i]);
  for (int n = 0; n < 200; ++n) {
    upper.step(u);
    lower.step(v);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.u.size(); ++i) worst = std::min(worst, u.u[i] - v.u[i]);
    ASSERT_GE(worst, -1e-10) << "step " << n;
  }
}

TEST(Properties, ConservedFormsKeepMass) {
  for (auto form : {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved}) {
    auto cfg = circle_config(64, 0.005, form);
    cfg.shape = CircleUnion{{Circle{{-0.22, 0, 0}, 0.1}, Circle{{0.18, 0, 0}, 0.15}}};
    cfg.forcing = RadialCosineForcing{3.0, 8.0};
    double m0 = -1.0, worst = 0.0;
    run(cfg, [&](const SimState& s) {
      const double m = integrate(s.u);
      if (m0 < 0) m0 = m;
      worst = std::max(worst, std::abs(m - m0));
    });
    EXPECT_LE(worst, 1e-10) << to_string(form);
  }
}

TEST(Properties, Deterministic) {
  auto cfg = circle_config(64, 0.003, ReactionFormId::modified_conserved);
  cfg.forcing = RadialCosineForcing{2.0, 8.0};
  const auto a = run(cfg);
  const auto b = run(cfg);
  EXPECT_EQ(a.u.data, b.u.data);
}
