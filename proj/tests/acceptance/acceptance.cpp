// Acceptance driver: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pfmcf/checks.hpp"
#include "pfmcf/experiment.hpp"
#include "pfmcf/reference.hpp"

namespace fs = std::filesystem;
using namespace pfmcf;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

fs::path g_out;
unsigned g_threads = 1;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return !v.empty();
}

bool all_complete(const ConvergenceReport& r, std::string& why) {
  for (const auto& c : r.cells) {
    if (c.status != "complete") {
      why += std::string(to_string(c.model)) + " P=" + std::to_string(c.p) + " " + c.status + " " + c.message + "; ";
    }
  }
  return why.empty();
}

double nan_or(std::optional<double> v) { return v.value_or(std::numeric_limits<double>::quiet_NaN()); }

Outcome criterion_1() {
  double worst = 0.0;
  for (auto form : {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved}) {
    SimConfig cfg;
    cfg.grid = GridSpec{2, 128};
    cfg.eps = 2.0 / 128;
    cfg.dt = 1.0 / (128.0 * 128.0);
    cfg.t_end = 0.0133;
    cfg.form = form;
    cfg.shape = preset_experiment(ExperimentName::two_circles_conserved).cfg.shape;
    double m0 = std::numeric_limits<double>::quiet_NaN();
    run(cfg, [&](const SimState& s) {
      const double m = integrate(s.u);
      if (std::isnan(m0)) m0 = m;
      worst = std::max(worst, std::abs(m - m0) / m0);
    });
  }
  return {worst <= 1e-10, "max relative mass drift " + num(worst) + " (limit 1e-10)"};
}

Outcome criterion_2() {
  const auto spec = preset_experiment(ExperimentName::shrinking_circle);
  const auto report = run_experiment(spec, g_out / "shrinking_circle", g_threads);
  std::string why;
  const bool complete = all_complete(report, why);
  const auto err = report.errors(ReactionFormId::classic_forced, "extinction_time");
  const double slope = nan_or(report.slope(ReactionFormId::classic_forced, "extinction_time"));
  const bool ok = complete && err.size() == 3 && decreasing(err) && slope >= 1.5 && slope <= 2.6 && err.back() <= 5e-3;
  return {ok, why + "reference " + num(circle_extinction_time({0.25, 0.0})) + ", errors " + list(err) + ", slope " +
                  num(slope) + " (band [1.5, 2.6])"};
}

Outcome criterion_3() {
  bool ok = true;
  std::string detail;
  for (double cg : {2.0, -2.0}) {
    auto spec = preset_experiment(ExperimentName::forced_circle);
    spec.cfg.forcing = ConstantForcing{cg};
    const auto report = run_experiment(spec, g_out / (cg > 0 ? "forced_circle_plus2" : "forced_circle_minus2"), g_threads);
    std::string why;
    ok = all_complete(report, why) && ok;
    detail += "C_g=" + num(cg) + " ref " + num(circle_extinction_time({0.25, cg})) + ": " + why;
    const auto ec = report.errors(ReactionFormId::classic_forced, "extinction_time");
    const auto em = report.errors(ReactionFormId::modified_forced, "extinction_time");
    for (auto m : spec.models) {
      const double slope = nan_or(report.slope(m, "extinction_time"));
      const auto e = report.errors(m, "extinction_time");
      const bool good = slope >= 1.5 && slope <= 2.6;
      ok = ok && good;
      detail += std::string(to_string(m)) + " errors " + list(e) + " slope " + num(slope) + (good ? "" : " [out of band]") + "; ";
    }
    for (std::size_t i = 0; i < std::min(ec.size(), em.size()); ++i) {
      const double ratio = std::max(ec[i], em[i]) / std::min(ec[i], em[i]);
      if (!(ratio <= 3.0)) {
        ok = false;
        detail += "model ratio " + num(ratio) + " at P=" + std::to_string(spec.sweep[i]) + "; ";
      }
    }
  }
  return {ok, detail};
}

Outcome criterion_4() {
  const auto spec = preset_experiment(ExperimentName::two_circles_conserved);
  const auto report = run_experiment(spec, g_out / "two_circles_conserved", g_threads);
  std::string why;
  const bool complete = all_complete(report, why);
  const double sc = nan_or(report.slope(ReactionFormId::classic_conserved, "extinction_time"));
  const double sm = nan_or(report.slope(ReactionFormId::modified_conserved, "extinction_time"));
  const TwoCircleLaw law{0.1, 0.15};
  const double r_star = two_circle_final_radius(law);
  const auto* cell = report.cell(ReactionFormId::modified_conserved, 256);
  double r_final = std::numeric_limits<double>::quiet_NaN();
  if (cell) {
    for (const auto& r : cell->rows) {
      if (r.quantity == "large_radius_at_extinction") r_final = r.measured;
    }
  }
  const double rel = std::abs(r_final - r_star) / r_star;
  const bool ok = complete && sc <= 1.4 && sm >= 1.5 && rel <= 0.02;
  return {ok, why + "reference t_ext " + num(two_circle_extinction_time(law)) + "; classic errors " +
                  list(report.errors(ReactionFormId::classic_conserved, "extinction_time")) + " slope " + num(sc) +
                  " (<= 1.4); modified errors " +
                  list(report.errors(ReactionFormId::modified_conserved, "extinction_time")) + " slope " + num(sm) +
                  " (>= 1.5); modified R at extinction " + num(r_final) + " vs R* " + num(r_star) + " (rel " +
                  num(rel) + ")"};
}

Outcome from_checks(const std::vector<CheckResult>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    o.detail += c.name + ": " + c.detail + (c.passed ? "" : " [fail]") + "; ";
  }
  return o;
}

Outcome criterion_5() { return from_checks({check_volume_order(0.25)}); }
Outcome criterion_6() { return from_checks({check_multiplier_order(0.1), check_multiplier_order(0.25)}); }
Outcome criterion_7() {
  return from_checks({check_eta_endpoint(), check_xi_bound(), check_profile_residual_order()});
}
Outcome criterion_8() { return from_checks({check_max_principle(10000), check_comparison()}); }

Outcome criterion_9() {
  const auto spec = preset_experiment(ExperimentName::forced_stationary_circle);
  const auto report = run_experiment(spec, g_out / "forced_stationary_circle", g_threads);
  std::string why;
  const bool complete = all_complete(report, why);
  const auto dc = report.errors(ReactionFormId::classic_conserved, "radius");
  const auto dm = report.errors(ReactionFormId::modified_conserved, "radius");
  const bool ok = complete && dc.size() == 1 && dm.size() == 1 && dm[0] <= 0.5 * dc[0];
  return {ok, why + "c_g " + num(stationary_circle_cg) + ", radius drift classic " + list(dc) + ", modified " +
                  list(dm) + " (modified must be <= half)"};
}

Outcome criterion_10() {
  const auto spec = preset_experiment(ExperimentName::torus_conserved);
  const auto report = run_experiment(spec, g_out / "torus_conserved", g_threads);
  std::string detail;
  bool ok = true;
  double drift[2] = {0, 0};
  int k = 0;
  for (auto m : {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved}) {
    const auto* cell = report.cell(m, 64);
    double t_topo = std::numeric_limits<double>::quiet_NaN(), v = 0, v0 = 0;
    if (cell) {
      for (const auto& r : cell->rows) {
        if (r.quantity == "topology_change_time") t_topo = r.measured;
        if (r.quantity == "volume_threshold_at_topology_change") v = r.measured, v0 = r.reference;
      }
    }
    ok = ok && cell && cell->status == "complete" && std::isfinite(t_topo);
    drift[k++] = std::abs(v - v0) / v0;
    detail += std::string(to_string(m)) + " topology change at t=" + num(t_topo) + ", relative volume drift " +
              num(drift[k - 1]) + "; ";
  }
  ok = ok && drift[0] > drift[1];
  return {ok, detail + "(classical drift must exceed modified)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  g_threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--out", out, "Directory for experiment outputs");
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--threads", g_threads, "Parallel sweep cells");
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::create_directories(g_out);

  const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                       criterion_5, criterion_6, criterion_7, criterion_8,
                                                       criterion_9, criterion_10};
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  return std::min(failed, 100);
}
