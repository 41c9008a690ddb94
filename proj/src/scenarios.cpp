#include "pulsejet/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "pulsejet/analysis.hpp"
#include "pulsejet/errors.hpp"
#include "pulsejet/hydro.hpp"

namespace pulsejet {

CalibratedModel calibrate(const RunConfig& config) {
  CalibratedModel model;
  model.base = config.calibration_base();
  FitOptions options;
  options.grid_points = config.grid_points;
  options.jobs = config.jobs;
  model.fit = fit(config.targets, model.base, config.budget, options);
  model.params = apply_parameters(model.fit.params, model.base);
  return model;
}

Scenario make_scenario(const RunConfig& config, const RigidBodyParams& params, double glide,
                       bool valves) {
  Scenario s = config.scenario();
  s.params = params;
  s.schedule.t_glide = quantize_duration(glide, config.dt);
  if (glide == 0.0) s.schedule.t_glide = 0.0;
  s.schedule.valves = valves;
  s.schedule.t_refill = valves ? CycleSchedule::kRefillWithValves : CycleSchedule::kRefillValveFree;
  s.n_cycles = 1;
  s.course.reset();
  return s;
}

double windowed_refill_drop(const Trajectory& trajectory, double window) {
  const auto marker = std::find_if(trajectory.markers.begin(), trajectory.markers.end(),
                                   [](const PhaseMarker& m) { return m.phase == Phase::Refill; });
  if (marker == trajectory.markers.end() || marker->index == 0) {
    throw DomainError("windowed_refill_drop: trajectory has no refill phase");
  }
  const std::size_t onset = marker->index - 1;
  const auto steps = static_cast<std::size_t>(std::llround(window / trajectory.dt));
  if (onset + steps >= trajectory.size()) {
    throw DomainError(fmt::format("windowed_refill_drop: trajectory ends inside the {} s window", window));
  }
  return trajectory.states[onset].v - trajectory.states[onset + steps].v;
}

namespace {

using Check = std::function<std::pair<bool, std::string>()>;

CriterionResult timed(int id, std::string title, const Check& check) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  const auto start = std::chrono::steady_clock::now();
  try {
    std::tie(r.pass, r.detail) = check();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = fmt::format("error: {}", e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

bool within(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

std::pair<bool, std::string> formulas() {
  bool ok = std::abs(evr(375e-6, 500e-6) - 75.0) < 1e-12 && evr(0.0, 500e-6) == 0.0;
  std::string detail;
  const std::pair<double, double> pairs[] = {{0.0, 0.0}, {0.37, 25.2}, {1.10, 50.0}, {3.30, 75.0}};
  for (const auto& [glide, expected] : pairs) {
    const double g = gpf(CycleSchedule::with_valves(glide));
    ok = ok && std::abs(g - expected) <= 0.5;
    detail += fmt::format("{}s->{:.2f}% ", glide, g);
  }
  return {ok, detail};
}

std::pair<bool, std::string> geometry_endpoints(const RunConfig& config) {
  const MantleGeometry& g = config.geometry;
  const double reduction = 100.0 * g.area_reduction();
  const double ratio = g.expansion_ratio();
  return {std::abs(reduction - 75.7) <= 0.1 && std::abs(ratio - 4.11) <= 0.02,
          fmt::format("reduction {:.2f}% ratio {:.3f}", reduction, ratio)};
}

std::pair<bool, std::string> fall_closure(const RunConfig& config) {
  const RigidBodyParams p = config.params();
  bool ok = true;
  std::string detail;
  for (double s : config.fall_s) {
    const Trajectory fall = simulate_fall(p, config.fall_force, s, config.dt, config.fall_duration);
    const FallIdentification id =
        identify_cda_from_fall({config.fall_force, to_trace(fall, "fall")}, p.hydro.rho);
    const double err = id.cda / cda_at(s, p.hydro) - 1.0;
    ok = ok && std::abs(err) < 0.005;
    detail += fmt::format("s={} {:+.4f}% ", s, 100.0 * err);
  }
  return {ok, detail};
}

std::pair<bool, std::string> evr_sweep(const RunConfig& config, const CalibratedModel& model) {
  const double target_peak[] = {0.21, 0.33, 0.39};
  const double target_transit[] = {2.9, 2.2, 2.1};
  const double evrs[] = {25.0, 50.0, 75.0};
  bool ok = true;
  double previous = 0.0;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    Scenario s = make_scenario(config, model.params, 0.0, true);
    s = apply_variable(s, SweepVariable::EVR, evrs[i]);
    const double peak = run_scenario(s).ledger.peak_speed;
    s.n_cycles = model.base.max_cycles;
    s.course = 0.5;
    const ScenarioResult course = run_scenario(s);
    const auto t = time_to_distance(course.trajectory, 0.5);
    ok = ok && within(peak, target_peak[i], 0.15) && peak > previous && t &&
         within(*t, target_transit[i], 0.20);
    previous = peak;
    detail += fmt::format("EVR{} peak {:.3f} t0.5 {:.2f}s ", evrs[i], peak, t ? *t : NAN);
  }
  return {ok, detail};
}

std::pair<bool, std::string> gpf_trends(const RunConfig& config, const CalibratedModel& model) {
  const Scenario base = make_scenario(config, model.params, 0.0, true);
  const auto rows = sweep(SweepVariable::GPF, {0.0, 25.0, 50.0, 75.0}, base, config.jobs);
  double cot[4], speed[4], onset[4];
  for (int i = 0; i < 4; ++i) {
    if (!rows[i].ledger.cot_defined()) return {false, rows[i].ledger.message};
    cot[i] = rows[i].ledger.cot_dimensionless;
    speed[i] = rows[i].ledger.avg_speed;
    onset[i] = rows[i].ledger.refill_onset_speed;
  }
  const double plateau = (speed[0] + speed[1] + speed[2]) / 3.0;
  const bool ok = cot[1] <= cot[0] && cot[2] <= cot[1] && (cot[2] - cot[3]) < (cot[1] - cot[2]) &&
                  speed[3] <= 0.75 * plateau && onset[1] < onset[0] && onset[2] < onset[1] &&
                  onset[3] < onset[2];
  return {ok, fmt::format("COT {:.3f}/{:.3f}/{:.3f}/{:.3f} avg {:.3f}/{:.3f}/{:.3f}/{:.3f}", cot[0],
                          cot[1], cot[2], cot[3], speed[0], speed[1], speed[2], speed[3])};
}

std::pair<bool, std::string> valve_comparison(const RunConfig& config, const CalibratedModel& model) {
  bool ok = true;
  std::string detail;
  int short_sign = 0;
  for (double glide : {0.0, 0.37, 1.10, 3.30}) {
    const ScenarioResult wv = run_scenario(make_scenario(config, model.params, glide, true));
    const ScenarioResult nv = run_scenario(make_scenario(config, model.params, glide, false));
    const int sign = nv.ledger.cot_dimensionless < wv.ledger.cot_dimensionless ? -1 : 1;
    if (glide < 3.0) {
      const double window = CycleSchedule::kRefillWithValves;
      const double drop_wv = windowed_refill_drop(wv.trajectory, window);
      const double drop_nv = windowed_refill_drop(nv.trajectory, window);
      ok = ok && drop_nv < drop_wv && nv.ledger.avg_speed < wv.ledger.avg_speed &&
           (short_sign == 0 || sign == short_sign);
      short_sign = sign;
      detail += fmt::format("g{} drop NV {:.3f}/WV {:.3f} ", glide, drop_nv, drop_wv);
    } else {
      ok = ok && sign != short_sign;
    }
    detail += fmt::format("COT NV {:.3f}/WV {:.3f}; ", nv.ledger.cot_dimensionless,
                          wv.ledger.cot_dimensionless);
  }
  return {ok, detail};
}

std::pair<bool, std::string> multi_cycle(const RunConfig& config, const CalibratedModel& model) {
  auto course = [&](double glide, bool valves) {
    Scenario s = make_scenario(config, model.params, glide, valves);
    s.n_cycles = 200;
    s.course = 2.0;
    return run_scenario(s).ledger;
  };
  const EnergyLedger wv0 = course(0.0, true);
  const EnergyLedger wv110 = course(1.10, true);
  const EnergyLedger nv110 = course(1.10, false);
  for (const auto* l : {&wv0, &wv110, &nv110}) {
    if (!l->cot_defined()) return {false, l->message};
  }
  const bool ok = wv0.avg_speed > wv110.avg_speed &&
                  nv110.cot_dimensionless < wv110.cot_dimensionless &&
                  wv110.cot_dimensionless < wv0.cot_dimensionless;
  return {ok, fmt::format("avg WV-0 {:.3f} WV-1.10 {:.3f}; COT NV-1.10 {:.3f} WV-1.10 {:.3f} WV-0 {:.3f}",
                          wv0.avg_speed, wv110.avg_speed, nv110.cot_dimensionless,
                          wv110.cot_dimensionless, wv0.cot_dimensionless)};
}

std::pair<bool, std::string> asymptotic_cot(const RunConfig& config, const CalibratedModel& model) {
  const Scenario base = make_scenario(config, model.params, 0.0, true);
  auto cot_at = [&](double glide) {
    return run_scenario(apply_variable(base, SweepVariable::GlideDuration, glide)).ledger.cot_specific;
  };
  const double c10 = cot_at(10.0);
  const double c30 = cot_at(30.0);
  const OptimumResult opt = find_optimum(Objective::MinCOT, SweepVariable::GlideDuration, 0.0, 10.0, base);
  double best = INFINITY;
  double best_glide = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = cot_at(0.1 * i);
    if (c < best) {
      best = c;
      best_glide = 0.1 * i;
    }
  }
  const bool interior = best_glide > 0.0 && best_glide < 10.0 && !opt.boundary;
  const bool agree = std::abs(opt.value - best_glide) <= 0.2;
  return {c30 > c10 && interior && agree,
          fmt::format("COT(10s) {:.3f} COT(30s) {:.3f} J/m; optimum {:.2f}s grid {:.1f}s", c10, c30,
                      opt.value, best_glide)};
}

std::pair<bool, std::string> numerical_hygiene(const RunConfig& config) {
  const RigidBodyParams p = config.params();
  const CycleSchedule schedule = CycleSchedule::with_valves(1.10);
  const Trajectory coarse = simulate(schedule, p, 2, config.dt);
  const Trajectory fine = simulate(schedule, p, 2, config.dt / 2.0);
  const double rel = std::abs(fine.back().x - coarse.back().x) / std::abs(fine.back().x);

  // Kinetic energy lost during the first glide against the drag work.
  std::size_t begin = 0, end = 0;
  for (std::size_t i = 0; i < coarse.markers.size(); ++i) {
    if (coarse.markers[i].phase == Phase::Glide) {
      begin = coarse.markers[i].index - 1;
      end = coarse.markers[i + 1].index - 1;
      break;
    }
  }
  const double m = effective_mass(coarse.states[begin], p);
  const double dke = 0.5 * m * (std::pow(coarse.states[begin].v, 2) - std::pow(coarse.states[end].v, 2));
  double work = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto power = [&](const BodyState& st) { return -glide_force(st, p) * st.v; };
    work += 0.5 * (power(coarse.states[i]) + power(coarse.states[i + 1])) * coarse.dt;
  }
  const double closure = std::abs(work / dke - 1.0);

  const Trajectory again = simulate(schedule, p, 2, config.dt);
  bool identical = again.size() == coarse.size();
  for (std::size_t i = 0; identical && i < again.size(); ++i) {
    identical = again.states[i].x == coarse.states[i].x && again.states[i].v == coarse.states[i].v;
  }
  return {rel < 1e-4 && closure < 1e-3 && identical,
          fmt::format("dt-halving {:.2e}, glide work-energy {:.2e}, deterministic {}", rel, closure,
                      identical)};
}

std::pair<bool, std::string> analysis_oracle() {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(31, 0.0, 3.0);
  const Trace line = make_trace(t, 0.2 * t, "synthetic");
  const MetricsReport m = metrics(line);
  const bool exact = std::abs(m.avg_speed - 0.2) < 1e-12 && std::abs(m.peak_speed - 0.2) < 1e-12;

  Eigen::VectorXd tt(3), xx(3);
  tt << 0.0, 1.45, 2.9;
  xx << 0.0, 0.25, 0.5;
  const double avg = metrics(make_trace(tt, xx)).avg_speed;
  const bool three_figures = fmt::format("{:.3g}", avg) == "0.172";

  std::stringstream buffer;
  emit(buffer, line);
  const Trace back = ingest(buffer);
  const bool round_trip = back.size() == line.size() &&
                          (back.t - line.t).cwiseAbs().maxCoeff() < 1e-9 &&
                          (back.x - line.x).cwiseAbs().maxCoeff() < 1e-9;
  return {exact && three_figures && round_trip,
          fmt::format("constant-velocity exact {}, 0.5 m/2.9 s = {:.3g} m/s, round trip {}", exact,
                      avg, round_trip)};
}

}  // namespace

std::vector<CriterionResult> run_reproduction_checks(const RunConfig& config) {
  std::vector<CriterionResult> results;
  results.push_back(timed(1, "formula exactness", formulas));
  results.push_back(timed(2, "geometry endpoints", [&] { return geometry_endpoints(config); }));
  results.push_back(timed(3, "terminal-fall closure", [&] { return fall_closure(config); }));

  CalibratedModel model;
  results.push_back(timed(4, "calibrated EVR sweep", [&] {
    model = calibrate(config);
    auto [ok, detail] = evr_sweep(config, model);
    return std::pair{ok, fmt::format("loss {:.4f} ({} evals); {}", model.fit.loss,
                                     model.fit.evaluations, detail)};
  }));
  results.push_back(timed(5, "GPF trade-off trends", [&] { return gpf_trends(config, model); }));
  results.push_back(timed(6, "valve comparison", [&] { return valve_comparison(config, model); }));
  results.push_back(timed(7, "multi-cycle ordering", [&] { return multi_cycle(config, model); }));
  results.push_back(timed(8, "asymptotic COT", [&] { return asymptotic_cot(config, model); }));
  results.push_back(timed(9, "numerical hygiene", [&] { return numerical_hygiene(config); }));
  results.push_back(timed(10, "analysis oracle", analysis_oracle));
  return results;
}

}  // namespace pulsejet
