#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pfmcf/observables.hpp"

using namespace pfmcf;

namespace {
constexpr double pi = std::numbers::pi;
const std::vector<Ray> axis_rays{Ray{{0, 0, 0}, {1, 0, 0}}, Ray{{0, 0, 0}, {0, 1, 0}},
                                 Ray{{0, 0, 0}, {1, 1, 0}}};
}  // namespace

TEST(Measure, PurePhases) {
  const GridSpec g{2, 32};
  const ScalarField zero(g, 0.0);
  const auto one = measure(ScalarField(g, 1.0), zero, 0.1, axis_rays, 0.5);
  EXPECT_DOUBLE_EQ(one.mass, 1.0);
  EXPECT_DOUBLE_EQ(one.volume_threshold, 1.0);
  EXPECT_TRUE(std::isnan(one.g_tilde_eps));
  EXPECT_EQ(one.time, 0.5);

  const auto none = measure(zero, zero, 0.1, axis_rays);
  EXPECT_EQ(none.volume_threshold, 0.0);
  EXPECT_EQ(none.mass, 0.0);
  for (double r : none.radii) EXPECT_EQ(r, 0.0);
}

TEST(Measure, CircleMassAndVolume) {
  const int p = 256;
  const double eps = 2.0 / p;
  const auto u = init_phase_field(GridSpec{2, p}, Circle{{0, 0, 0}, 0.25}, eps);
  const auto obs = measure(u, ScalarField(u.grid, 0.0), eps, axis_rays);
  EXPECT_NEAR(obs.mass, pi * 0.0625, 12.0 * eps * eps);
  EXPECT_NEAR(obs.volume_threshold, pi * 0.0625, eps);
  EXPECT_NEAR(obs.mass, obs.volume_threshold, eps);
  for (double r : obs.radii) EXPECT_NEAR(r, 0.25, u.grid.h());
  EXPECT_NEAR(obs.g_tilde_eps, 4.0, 1e-6);
  EXPECT_GE(obs.volume_threshold, 0.0);
  EXPECT_LE(obs.volume_threshold, 1.0);
  EXPECT_NEAR(obs.max_u, 1.0, 1e-12);
  EXPECT_LT(obs.min_u, 1e-10);
}

TEST(Measure, ThresholdVolumeSecondOrderOnCircles) {
  // The q-profile circle has {u >= 1/2} = disc of radius R exactly, so the
  // sub-cell estimate should converge to πR² much faster than cell counting.
  for (int p : {64, 128, 256}) {
    const auto u = init_phase_field(GridSpec{2, p}, Circle{{0.013, -0.021, 0}, 0.2}, 2.0 / p);
    EXPECT_NEAR(volume_threshold(u), pi * 0.04, 2.0 / (p * p)) << "P = " << p;
  }
}

TEST(Measure, ThresholdVolumeSphere) {
  const int p = 64;
  const auto u = init_phase_field(GridSpec{3, p}, Circle{{0, 0, 0}, 0.25}, 2.0 / p);
  EXPECT_NEAR(volume_threshold(u), 4.0 / 3.0 * pi * std::pow(0.25, 3), 4e-4);
}

TEST(RadiusAlongRay, Examples) {
  const int p = 256;
  const auto u = init_phase_field(GridSpec{2, p}, Circle{{0, 0, 0}, 0.25}, 2.0 / p);
  EXPECT_NEAR(radius_along_ray(u, {0, 0, 0}, {1, 0, 0}), 0.25, u.grid.h());
  EXPECT_NEAR(radius_along_ray(u, {0, 0, 0}, {-3, 4, 0}), 0.25, u.grid.h());
  EXPECT_EQ(radius_along_ray(ScalarField(u.grid, 0.0), {0, 0, 0}, {1, 0, 0}), 0.0);
  // Origin outside the set.
  EXPECT_EQ(radius_along_ray(u, {0.4, 0.4, 0}, {1, 0, 0}), 0.0);
  EXPECT_THROW(radius_along_ray(u, {0, 0, 0}, {0, 0, 0}), std::invalid_argument);
}

TEST(RadiusAlongRay, TwoCircles) {
  const int p = 128;
  const auto u = init_phase_field(
      GridSpec{2, p}, CircleUnion{{Circle{{-0.22, 0, 0}, 0.1}, Circle{{0.18, 0, 0}, 0.15}}}, 2.0 / p);
  EXPECT_NEAR(radius_along_ray(u, {-0.22, 0, 0}, {0, 1, 0}), 0.1, u.grid.h());
  EXPECT_NEAR(radius_along_ray(u, {0.18, 0, 0}, {0, 1, 0}), 0.15, u.grid.h());
}

TEST(ObservationCsv, HeaderAndPrecision) {
  std::ostringstream os;
  write_observation_header(os, 2);
  Observation o;
  o.time = 0.1;
  o.mass = 1.0 / 3.0;
  o.radii = {0.25, 0.0};
  write_observation_row(os, o);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "time,mass,volume,r0,r1,g_eps,g_tilde_eps,max_u,min_u");
  EXPECT_NE(row.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(row.find("nan"), std::string::npos);
  EXPECT_EQ(std::stod(format_double(1.0 / 7.0)), 1.0 / 7.0);
}
