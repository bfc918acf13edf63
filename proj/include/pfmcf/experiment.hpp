#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pfmcf/config_io.hpp"
#include "pfmcf/field_io.hpp"
#include "pfmcf/observables.hpp"
#include "pfmcf/reference.hpp"
#include "pfmcf/stepper.hpp"

namespace pfmcf {

enum class ExperimentName {
  shrinking_circle,
  forced_circle,
  two_circles_conserved,
  forced_stationary_circle,
  torus_conserved,
  custom
};

inline constexpr std::string_view to_string(ExperimentName n) {
  switch (n) {
    case ExperimentName::shrinking_circle: return "shrinking_circle";
    case ExperimentName::forced_circle: return "forced_circle";
    case ExperimentName::two_circles_conserved: return "two_circles_conserved";
    case ExperimentName::forced_stationary_circle: return "forced_stationary_circle";
    case ExperimentName::torus_conserved: return "torus_conserved";
    case ExperimentName::custom: return "custom";
  }
  return "?";
}

inline ExperimentName experiment_name_from_string(std::string_view s) {
  for (auto n : {ExperimentName::shrinking_circle, ExperimentName::forced_circle,
                 ExperimentName::two_circles_conserved, ExperimentName::forced_stationary_circle,
                 ExperimentName::torus_conserved, ExperimentName::custom}) {
    if (to_string(n) == s) return n;
  }
  throw ConfigError("name", "unknown experiment '" + std::string(s) + "'");
}

/// A family of runs: every model at every resolution of the sweep, with
/// ε = 2/P and Δt = 1/P² derived per cell from the template config.
struct ExperimentSpec {
  ExperimentName name = ExperimentName::custom;
  SimConfig cfg;
  std::vector<int> sweep;
  std::vector<ReactionFormId> models;

  SimConfig cell_config(ReactionFormId model, int p) const {
    SimConfig c = cfg;
    c.grid.p = p;
    c.eps = 2.0 / p;
    c.dt = 1.0 / (static_cast<double>(p) * p);
    c.form = model;
    switch (name) {
      case ExperimentName::shrinking_circle:
      case ExperimentName::forced_circle:
        c.stop_on_extinction = true;
        c.extinction_probe.reset();
        break;
      case ExperimentName::two_circles_conserved: {
        const auto& circles = std::get<CircleUnion>(cfg.shape).circles;
        const auto small = std::min_element(circles.begin(), circles.end(),
                                            [](auto& a, auto& b) { return a.radius < b.radius; });
        c.extinction_probe = small->center;
        c.stop_on_extinction = true;
        break;
      }
      case ExperimentName::torus_conserved:
        c.observe_every = 1;
        break;
      default:
        break;
    }
    return c;
  }

  void validate() const {
    if (sweep.empty()) throw ConfigError("sweep", "must not be empty");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      GridSpec{cfg.grid.dim, sweep[i]}.validate();
      if (i > 0 && sweep[i] <= sweep[i - 1]) throw ConfigError("sweep", "must be strictly increasing");
    }
    if (models.empty()) throw ConfigError("models", "must not be empty");
    const auto need = [](bool ok, const char* what, const char* detail) {
      if (!ok) throw ConfigError(what, detail);
    };
    switch (name) {
      case ExperimentName::shrinking_circle:
        need(std::holds_alternative<Circle>(cfg.shape), "shape", "shrinking_circle needs a circle");
        need(std::holds_alternative<NoForcing>(cfg.forcing), "forcing", "shrinking_circle has no forcing");
        break;
      case ExperimentName::forced_circle:
        need(std::holds_alternative<Circle>(cfg.shape), "shape", "forced_circle needs a circle");
        need(std::holds_alternative<ConstantForcing>(cfg.forcing), "forcing",
             "forced_circle needs constant forcing");
        break;
      case ExperimentName::two_circles_conserved: {
        const auto* u = std::get_if<CircleUnion>(&cfg.shape);
        need(u != nullptr && u->circles.size() == 2, "shape", "two_circles_conserved needs two circles");
        need(u->circles[0].radius != u->circles[1].radius, "shape", "circle radii must differ");
        need(std::holds_alternative<NoForcing>(cfg.forcing), "forcing", "two_circles_conserved has no forcing");
        break;
      }
      case ExperimentName::forced_stationary_circle:
        need(std::holds_alternative<Circle>(cfg.shape), "shape", "forced_stationary_circle needs a circle");
        need(std::holds_alternative<RadialCosineForcing>(cfg.forcing), "forcing",
             "forced_stationary_circle needs radial_cosine forcing");
        break;
      case ExperimentName::torus_conserved:
        need(std::holds_alternative<Torus>(cfg.shape), "shape", "torus_conserved needs a torus");
        break;
      case ExperimentName::custom:
        break;
    }
    for (auto m : models) {
      for (int p : sweep) cell_config(m, p).validate();
    }
  }
};

/// One line of report.csv.
struct ReportRow {
  std::string experiment;
  std::string model;
  int p = 0;  // 0 marks a slope row
  double eps = std::numeric_limits<double>::quiet_NaN();
  double dt = std::numeric_limits<double>::quiet_NaN();
  std::string quantity;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double reference = std::numeric_limits<double>::quiet_NaN();
  double abs_error = std::numeric_limits<double>::quiet_NaN();
};

struct CellResult {
  ReactionFormId model{};
  int p = 0;
  std::string status;  // complete | incomplete | degenerate | error
  std::string message;
  std::vector<ReportRow> rows;
  std::vector<Observation> observations;
};

struct ConvergenceReport {
  std::string experiment;
  std::vector<CellResult> cells;
  std::vector<ReportRow> slopes;

  const CellResult* cell(ReactionFormId model, int p) const {
    for (const auto& c : cells) {
      if (c.model == model && c.p == p) return &c;
    }
    return nullptr;
  }

  std::optional<double> slope(ReactionFormId model, std::string_view quantity) const {
    for (const auto& s : slopes) {
      if (s.model == to_string(model) && s.quantity == quantity && std::isfinite(s.measured)) {
        return s.measured;
      }
    }
    return std::nullopt;
  }

  /// abs_error of `quantity` per sweep entry, in sweep order.
  std::vector<double> errors(ReactionFormId model, std::string_view quantity) const {
    std::vector<double> out;
    for (const auto& c : cells) {
      if (c.model != model) continue;
      for (const auto& r : c.rows) {
        if (r.quantity == quantity) out.push_back(r.abs_error);
      }
    }
    return out;
  }
};

/// Least-squares slope of log(y) against log(x). NaN with fewer than three
/// usable (positive, finite) points.
inline double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++n;
  }
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Rays used to track radii: one per circle (through its centre, along +y),
/// or for a torus one through the tube centre along the axis and one from the
/// torus centre in the equatorial plane.
inline std::vector<Ray> rays_for(const ShapeSpec& shape) {
  std::vector<Ray> rays;
  if (const auto* c = std::get_if<Circle>(&shape)) {
    rays.push_back({c->center, {0, 1, 0}});
    rays.push_back({c->center, {1, 0, 0}});
    rays.push_back({c->center, {0, -1, 0}});
    rays.push_back({c->center, {-1, 0, 0}});
  } else if (const auto* u = std::get_if<CircleUnion>(&shape)) {
    for (const auto& c : u->circles) rays.push_back({c.center, {0, 1, 0}});
  } else if (const auto* t = std::get_if<Torus>(&shape)) {
    Point tube = t->center;
    tube[0] += t->major_radius;
    rays.push_back({tube, {0, 0, 1}});
    rays.push_back({t->center, {1, 0, 0}});
  }
  return rays;
}

namespace detail {

inline double mean_radius(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double s = 0.0;
  for (double v : r) s += v;
  return s / static_cast<double>(r.size());
}

inline std::string cell_stem(const ExperimentSpec& spec, ReactionFormId model, int p) {
  return std::string(to_string(spec.name)) + "_" + std::string(to_string(model)) + "_P" + std::to_string(p);
}

}  // namespace detail

/// Runs one (model, P) cell. With a non-empty `out_dir` it writes the
/// observation CSV and the final field dump with its sidecar.
inline CellResult run_cell(const ExperimentSpec& spec, ReactionFormId model, int p,
                           const std::filesystem::path& out_dir = {}) {
  const SimConfig cfg = spec.cell_config(model, p);
  const std::string experiment(to_string(spec.name));
  const std::string model_name(to_string(model));
  CellResult cell;
  cell.model = model;
  cell.p = p;

  const auto row = [&](std::string quantity, double measured, double reference) {
    ReportRow r{experiment, model_name, p, cfg.eps, cfg.dt, std::move(quantity), measured, reference,
                std::abs(measured - reference)};
    cell.rows.push_back(r);
  };

  Stepper stepper(cfg);
  const auto rays = rays_for(cfg.shape);
  const ScalarField& g = stepper.forcing();

  // Torus: the hole closes when u at the torus centre reaches 1/2.
  std::optional<Point> hole;
  if (const auto* t = std::get_if<Torus>(&cfg.shape)) hole = t->center;
  std::optional<std::size_t> topology_index;

  const SimState final_state = stepper.run([&](const SimState& s) {
    cell.observations.push_back(measure(s.u, g, cfg.eps, rays, s.time));
    if (hole && !topology_index && sample(s.u, *hole) >= 0.5) {
      topology_index = cell.observations.size() - 1;
    }
  });

  const auto& obs = cell.observations;
  const Observation& first = obs.front();
  const Observation& last = obs.back();
  const Termination how = final_state.terminated.value_or(Termination::reached_t_end);
  cell.status = how == Termination::degenerate ? "degenerate" : "complete";

  switch (spec.name) {
    case ExperimentName::shrinking_circle:
    case ExperimentName::forced_circle: {
      const auto& c = std::get<Circle>(cfg.shape);
      const double cg = spec.name == ExperimentName::forced_circle ? std::get<ConstantForcing>(cfg.forcing).cg : 0.0;
      const double reference = circle_extinction_time({c.radius, cg});
      if (final_state.extinction_time) {
        row("extinction_time", *final_state.extinction_time, reference);
      } else {
        cell.status = "incomplete";
        cell.message = "no extinction before t_end";
      }
      break;
    }
    case ExperimentName::two_circles_conserved: {
      const auto& circles = std::get<CircleUnion>(cfg.shape).circles;
      const bool first_small = circles[0].radius < circles[1].radius;
      const Circle& small = first_small ? circles[0] : circles[1];
      const Circle& large = first_small ? circles[1] : circles[0];
      const TwoCircleLaw law{small.radius, large.radius};
      // Volume drift over the life of the small circle; the observation taken
      // after it vanished is excluded.
      const std::size_t usable = final_state.extinction_time ? obs.size() - 1 : obs.size();
      std::size_t worst = 0;
      for (std::size_t i = 0; i < usable; ++i) {
        if (std::abs(obs[i].volume_threshold - first.volume_threshold) >
            std::abs(obs[worst].volume_threshold - first.volume_threshold)) {
          worst = i;
        }
      }
      if (final_state.extinction_time) {
        row("extinction_time", *final_state.extinction_time, two_circle_extinction_time(law));
        row("large_radius_at_extinction", radius_along_ray(final_state.u, large.center, {0, 1, 0}),
            two_circle_final_radius(law));
      } else {
        cell.status = cell.status == "complete" ? "incomplete" : cell.status;
        cell.message = "small circle did not vanish before t_end";
      }
      row("volume_drift", obs[worst].volume_threshold, first.volume_threshold);
      break;
    }
    case ExperimentName::forced_stationary_circle: {
      const auto& c = std::get<Circle>(cfg.shape);
      row("forcing_cg", std::get<RadialCosineForcing>(cfg.forcing).cg,
          std::get<RadialCosineForcing>(cfg.forcing).cg);
      row("radius", detail::mean_radius(last.radii), c.radius);
      row("volume", last.volume_threshold, first.volume_threshold);
      break;
    }
    case ExperimentName::torus_conserved: {
      const std::size_t at = topology_index.value_or(obs.size() - 1);
      if (!topology_index) cell.message = "hole did not close before t_end; values at t_end";
      row("topology_change_time", topology_index ? obs[at].time : std::numeric_limits<double>::quiet_NaN(),
          std::numeric_limits<double>::quiet_NaN());
      row("volume_threshold_at_topology_change", obs[at].volume_threshold, first.volume_threshold);
      row("mass_at_topology_change", obs[at].mass, first.mass);
      double worst = 0.0;
      for (std::size_t i = 0; i <= at; ++i) {
        worst = std::max(worst, std::abs(obs[i].volume_threshold - first.volume_threshold));
      }
      row("max_volume_threshold_drift", first.volume_threshold + worst, first.volume_threshold);
      break;
    }
    case ExperimentName::custom:
      row("final_mass", last.mass, first.mass);
      break;
  }
  if (how == Termination::degenerate) cell.message = "degenerate nonlocal term at t = " + format_double(final_state.time);

  if (!out_dir.empty()) {
    const auto stem = detail::cell_stem(spec, model, p);
    std::ofstream os(out_dir / (stem + "_obs.csv"));
    write_observation_header(os, rays.size());
    for (const auto& o : obs) write_observation_row(os, o);
    write_field_dump(out_dir / (stem + "_final.pfmf"), final_state.u,
                     FieldMetadata{cfg.eps, cfg.dt, final_state.time, model_name});
  }
  return cell;
}

inline void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "experiment,model,P,eps,dt,quantity,measured,reference,abs_error\n";
  const auto emit = [&os](const ReportRow& r) {
    os << r.experiment << ',' << r.model << ',' << (r.p > 0 ? std::to_string(r.p) : std::string("slope")) << ','
       << (r.p > 0 ? format_double(r.eps) : "") << ',' << (r.p > 0 ? format_double(r.dt) : "") << ','
       << r.quantity << ',' << format_double(r.measured) << ',' << (r.p > 0 ? format_double(r.reference) : "")
       << ',' << (r.p > 0 ? format_double(r.abs_error) : "") << '\n';
  };
  for (const auto& c : report.cells) {
    for (const auto& r : c.rows) emit(r);
  }
  for (const auto& s : report.slopes) emit(s);
}

/// Runs every (model, P) cell, fits log-log slopes of abs_error against ε per
/// (model, quantity), and, with a non-empty `out_dir`, writes per-cell files,
/// report.csv and manifest.json. Cells run on up to `threads` threads; the
/// report does not depend on the thread count.
inline ConvergenceReport run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir = {},
                                        unsigned threads = 1) {
  spec.validate();
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  struct Job {
    ReactionFormId model;
    int p;
  };
  std::vector<Job> jobs;
  for (auto m : spec.models) {
    for (int p : spec.sweep) jobs.push_back({m, p});
  }

  ConvergenceReport report;
  report.experiment = std::string(to_string(spec.name));
  report.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        report.cells[i] = run_cell(spec, jobs[i].model, jobs[i].p, out_dir);
      } catch (const std::exception& e) {
        CellResult failed;
        failed.model = jobs[i].model;
        failed.p = jobs[i].p;
        failed.status = "error";
        failed.message = e.what();
        report.cells[i] = std::move(failed);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  // Slopes per (model, quantity) in first-seen order.
  for (auto m : spec.models) {
    std::vector<std::string> quantities;
    for (const auto& c : report.cells) {
      if (c.model != m) continue;
      for (const auto& r : c.rows) {
        if (r.quantity != "forcing_cg" && std::find(quantities.begin(), quantities.end(), r.quantity) == quantities.end()) {
          quantities.push_back(r.quantity);
        }
      }
    }
    for (const auto& q : quantities) {
      std::vector<double> eps, err;
      for (const auto& c : report.cells) {
        if (c.model != m) continue;
        for (const auto& r : c.rows) {
          if (r.quantity == q) {
            eps.push_back(r.eps);
            err.push_back(r.abs_error);
          }
        }
      }
      ReportRow s;
      s.experiment = report.experiment;
      s.model = std::string(to_string(m));
      s.quantity = q;
      s.measured = fit_loglog_slope(eps, err);
      report.slopes.push_back(s);
    }
  }

  if (!out_dir.empty()) {
    std::ofstream os(out_dir / "report.csv");
    write_report_csv(os, report);
    nlohmann::ordered_json manifest;
    manifest["experiment"] = report.experiment;
    manifest["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
      manifest["cells"].push_back({{"model", std::string(to_string(c.model))},
                                   {"P", c.p},
                                   {"status", c.status},
                                   {"message", c.message},
                                   {"files", {detail::cell_stem(spec, c.model, c.p) + "_obs.csv",
                                              detail::cell_stem(spec, c.model, c.p) + "_final.pfmf"}}});
    }
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  }
  return report;
}

/// True if any cell ended on a degenerate nonlocal term.
inline bool has_degenerate_cell(const ConvergenceReport& r) {
  return std::any_of(r.cells.begin(), r.cells.end(), [](const auto& c) { return c.status == "degenerate"; });
}

// ---------------------------------------------------------------------------
// Config files and presets.

inline ExperimentSpec experiment_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  detail::check_keys(j, {"name", "cfg", "sweep", "models"}, "experiment");
  ExperimentSpec spec;
  spec.name = experiment_name_from_string(detail::require<std::string>(j, "name", "experiment"));
  if (j.contains("cfg")) spec.cfg = sim_config_from_json(j["cfg"], spec.cfg, base_dir);
  spec.sweep = detail::require<std::vector<int>>(j, "sweep", "experiment");
  for (const auto& m : detail::require<std::vector<std::string>>(j, "models", "experiment")) {
    spec.models.push_back(reaction_form_from_string(m));
  }
  return spec;
}

inline json experiment_to_json(const ExperimentSpec& spec) {
  json models = json::array();
  for (auto m : spec.models) models.push_back(std::string(to_string(m)));
  return {{"name", std::string(to_string(spec.name))},
          {"cfg", sim_config_to_json(spec.cfg)},
          {"sweep", spec.sweep},
          {"models", models}};
}

/// Calibrated forcing amplitude for the stationary-circle test at P = 256.
inline constexpr double stationary_circle_cg = 20.0;

/// The desk-scale versions of the reference experiments.
inline ExperimentSpec preset_experiment(ExperimentName name) {
  ExperimentSpec s;
  s.name = name;
  s.sweep = {64, 128, 256};
  s.cfg.grid = GridSpec{2, 256};
  s.cfg.observe_every = 16;
  switch (name) {
    case ExperimentName::shrinking_circle:
      s.cfg.shape = Circle{{0, 0, 0}, 0.25};
      s.cfg.t_end = 0.05;
      s.models = {ReactionFormId::classic_forced};
      break;
    case ExperimentName::forced_circle:
      s.cfg.shape = Circle{{0, 0, 0}, 0.25};
      s.cfg.forcing = ConstantForcing{2.0};
      s.cfg.t_end = 0.07;
      s.models = {ReactionFormId::classic_forced, ReactionFormId::modified_forced};
      break;
    case ExperimentName::two_circles_conserved:
      s.cfg.shape = CircleUnion{{Circle{{-0.22, 0, 0}, 0.1}, Circle{{0.18, 0, 0}, 0.15}}};
      s.cfg.t_end = 0.02;
      s.cfg.observe_every = 4;
      s.models = {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved};
      break;
    case ExperimentName::forced_stationary_circle:
      s.cfg.shape = Circle{{0, 0, 0}, 0.25};
      s.cfg.forcing = RadialCosineForcing{stationary_circle_cg, 8.0};
      s.cfg.t_end = 0.01;
      s.sweep = {256};
      s.models = {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved};
      break;
    case ExperimentName::torus_conserved:
      s.cfg.grid = GridSpec{3, 64};
      // A tube thin enough for the hole to close but thick enough (about 4.5ε
      // at P = 64) that the classical model does not dissolve it first.
      s.cfg.shape = Torus{{0, 0, 0}, 0.22, 0.14};
      s.cfg.t_end = 0.01;
      s.sweep = {64};
      s.models = {ReactionFormId::classic_conserved, ReactionFormId::modified_conserved};
      break;
    case ExperimentName::custom:
      s.cfg.shape = Circle{{0, 0, 0}, 0.25};
      s.cfg.t_end = 0.01;
      s.models = {ReactionFormId::classic_forced};
      break;
  }
  return s;
}

}  // namespace pfmcf
