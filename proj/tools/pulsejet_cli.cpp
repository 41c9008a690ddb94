// Command-line front end: simulate, fall, fit, sweep, analyze, compare, scenarios.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pulsejet/analysis.hpp"
#include "pulsejet/calibrate.hpp"
#include "pulsejet/config.hpp"
#include "pulsejet/cycle.hpp"
#include "pulsejet/errors.hpp"
#include "pulsejet/hydro.hpp"
#include "pulsejet/scenarios.hpp"

namespace fs = std::filesystem;
using namespace pulsejet;

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<double> evr;
  std::optional<double> glide;
  std::optional<double> gpf;
  std::optional<int> cycles;
  std::optional<double> dt;
  std::optional<bool> valves;
  std::optional<int> jobs;
  std::optional<std::string> var;
  std::optional<std::string> grid;
  std::optional<int> window;
  std::optional<double> distance;
  std::vector<std::string> inputs;
  bool paper = false;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("--grid: '{}' is not a number", item));
    }
  }
  if (grid.empty()) throw ConfigError("--grid is empty");
  return grid;
}

/// Config file (if any) with flags applied on top.
RunConfig effective_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.valves) c.set_valves(*f.valves);
  if (f.dt) c.dt = *f.dt;
  if (f.cycles) c.cycles = *f.cycles;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.evr) c.schedule = schedule_for_evr(c.schedule, *f.evr / 100.0, c.geometry.s_max, c.evr_timing, c.dt);
  if (f.glide) c.schedule.t_glide = *f.glide;
  if (f.gpf) c.schedule.t_glide = quantize_duration(glide_for_gpf(*f.gpf, c.schedule), c.dt);
  if (f.var) c.sweep_variable = parse_sweep_variable(*f.var);
  if (f.grid) c.sweep_grid = parse_grid(*f.grid);
  if (f.window) c.window = *f.window;
  if (f.distance) c.distance = *f.distance;
  c.validate();
  return c;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  std::ofstream os(dir / name);
  if (!os) throw IoError(fmt::format("cannot write '{}'", (dir / name).string()));
  return os;
}

void echo_config(const Flags& f, const RunConfig& c) {
  auto os = open_output(f.out, "effective.cfg");
  write_config(os, c);
}

void write_ledger(std::ostream& os, const EnergyLedger& l) {
  fmt::print(os, "status={}\n", status_name(l.status));
  if (!l.message.empty()) fmt::print(os, "message={}\n", l.message);
  fmt::print(os, "E_expulsion_J={}\nE_glide_J={}\nE_refill_J={}\nE_total_J={}\n", l.energy.expulsion,
             l.energy.glide, l.energy.refill, l.E_total);
  fmt::print(os, "distance_m={}\nduration_s={}\navg_speed_mps={}\npeak_speed_mps={}\n", l.distance,
             l.duration, l.avg_speed, l.peak_speed);
  fmt::print(os, "refill_onset_mps={}\nrefill_drop_mps={}\nend_speed_mps={}\n", l.refill_onset_speed,
             l.refill_drop, l.end_speed);
  fmt::print(os, "cot_J_per_m={}\ncot_dimensionless={}\n", l.cot_specific, l.cot_dimensionless);
}

int run_simulate(const Flags& f) {
  const RunConfig c = effective_config(f);
  const ScenarioResult r = run_scenario(c.scenario());
  echo_config(f, c);
  auto traj = open_output(f.out, "trajectory.csv");
  write_trajectory_csv(traj, r.trajectory);
  auto ledger = open_output(f.out, "ledger.txt");
  write_ledger(ledger, r.ledger);
  const auto& l = r.ledger;
  fmt::print("simulate: EVR {:.0f}% GPF {:.1f}% cycles {} distance {:.4f} m avg {:.4f} m/s peak {:.4f} m/s "
             "COT {:.4g} ({})\n",
             100.0 * c.schedule.evr_target, gpf(c.schedule), r.trajectory.cycles, l.distance,
             l.avg_speed, l.peak_speed, l.cot_dimensionless, status_name(l.status));
  return 0;
}

int run_fall(const Flags& f) {
  const RunConfig c = effective_config(f);
  const RigidBodyParams p = c.params();
  echo_config(f, c);
  auto os = open_output(f.out, "fall.csv");
  fmt::print(os, "s,cda_m2,configured_cda_m2,u_t_mps,u_t_std_mps,window_begin_s,window_end_s\n");
  double worst = 0.0;
  for (double s : c.fall_s) {
    const Trajectory fall = simulate_fall(p, c.fall_force, s, c.dt, c.fall_duration);
    PlateauCriteria criteria;
    criteria.smoothing = c.window;
    const FallIdentification id =
        identify_cda_from_fall({c.fall_force, to_trace(fall, "fall")}, p.hydro.rho, criteria);
    const double configured = cda_at(s, p.hydro);
    worst = std::max(worst, std::abs(id.cda / configured - 1.0));
    fmt::print(os, "{},{},{},{},{},{},{}\n", s, id.cda, configured, id.u_t, id.u_t_std, id.window_begin,
               id.window_end);
  }
  fmt::print("fall: {} configurations, F_net {} N, worst C_D*A error {:.3f}%\n", c.fall_s.size(),
             c.fall_force, 100.0 * worst);
  return 0;
}

int run_fit(const Flags& f) {
  RunConfig c = effective_config(f);
  const CalibratedModel model = calibrate(c);
  const FitResult& r = model.fit;
  echo_config(f, c);
  {
    auto os = open_output(f.out, "fit.csv");
    fmt::print(os, "parameter,value,lower,upper\n");
    for (int i = 0; i < kParameterCount; ++i) {
      fmt::print(os, "{},{},{},{}\n", parameter_names()[i], r.params(i), model.base.bounds.lower(i),
                 model.base.bounds.upper(i));
    }
  }
  {
    auto os = open_output(f.out, "fit_log.csv");
    fmt::print(os, "iteration,loss\n");
    for (const auto& [it, loss] : r.log) fmt::print(os, "{},{}\n", it, loss);
  }
  {
    auto os = open_output(f.out, "residuals.csv");
    fmt::print(os, "target,measured,simulated,relative,weight\n");
    for (const auto& res : r.residuals) {
      fmt::print(os, "{},{},{},{},{}\n", res.label, res.target, res.simulated, res.relative, res.weight);
    }
  }
  c.apply_fit(r.params);
  {
    auto os = open_output(f.out, "fitted.cfg");
    write_config(os, c);
  }
  fmt::print("fit: loss {:.6g} after {} evaluations ({} iterations, {})\n", r.loss, r.evaluations,
             r.iterations, r.converged ? "converged" : "not converged");
  return 0;
}

int run_sweep(const Flags& f) {
  const RunConfig c = effective_config(f);
  const auto rows = sweep(c.sweep_variable, c.sweep_grid, c.scenario(), c.jobs);
  echo_config(f, c);
  auto os = open_output(f.out, "sweep.csv");
  write_sweep_csv(os, rows);
  std::size_t ok = 0;
  for (const auto& row : rows) ok += row.ledger.status == LedgerStatus::Ok;
  fmt::print("sweep: {} over {} values, {} ok\n", variable_name(c.sweep_variable), rows.size(), ok);
  return 0;
}

int run_analyze(const Flags& f) {
  if (f.inputs.size() != 1) throw ConfigError("analyze expects exactly one trace file");
  const RunConfig c = effective_config(f);
  const Trace trace = ingest(fs::path(f.inputs[0]));
  MetricsOptions options;
  options.window = c.window;
  options.query_distance = c.distance;
  if (!f.config.empty()) options.schedule = c.schedule;
  const MetricsReport report = metrics(trace, options);
  echo_config(f, c);
  {
    auto os = open_output(f.out, "report.txt");
    write_report(os, report);
  }
  {
    auto os = open_output(f.out, "velocity.csv");
    const Eigen::VectorXd v = velocity(trace, clamp_window(c.window, trace.size()));
    fmt::print(os, "t_s,v_mps\n");
    for (Eigen::Index i = 0; i < trace.size(); ++i) fmt::print(os, "{},{}\n", trace.t(i), v(i));
  }
  fmt::print("analyze: {} samples, distance {:.4f} m in {:.3f} s, avg {:.4f} m/s, peak {:.4f} m/s\n",
             trace.size(), report.distance, report.duration, report.avg_speed, report.peak_speed);
  return 0;
}

int run_compare(const Flags& f) {
  if (f.inputs.empty() || f.inputs.size() > 2) {
    throw ConfigError("compare expects a reference trace and optionally a second trace");
  }
  const RunConfig c = effective_config(f);
  const Trace reference = ingest(fs::path(f.inputs[0]));
  ComparisonReport report;
  if (f.inputs.size() == 2) {
    report = compare(reference, ingest(fs::path(f.inputs[1])), c.window);
  } else {
    report = compare(run_scenario(c.scenario()).trajectory, reference, c.window);
  }
  echo_config(f, c);
  auto os = open_output(f.out, "comparison.txt");
  write_report(os, report);
  fmt::print("compare: {} samples over [{:.3f}, {:.3f}] s, RMSE x {:.4g} m, RMSE v {:.4g} m/s\n",
             report.samples, report.t_begin, report.t_end, report.rmse_x, report.rmse_v);
  return 0;
}

int run_scenarios(const Flags& f) {
  if (!f.paper) throw ConfigError("scenarios: only --paper is available");
  const RunConfig c = effective_config(f);
  const auto results = run_reproduction_checks(c);
  echo_config(f, c);
  auto os = open_output(f.out, "scenarios.txt");
  int failed = 0;
  for (const auto& r : results) {
    const std::string line = fmt::format("[{}] criterion {:>2} {:<24} {:6.2f}s  {}", r.pass ? "PASS" : "FAIL",
                                         r.id, r.title, r.seconds, r.detail);
    fmt::print("{}\n", line);
    fmt::print(os, "{}\n", line);
    failed += !r.pass;
  }
  fmt::print("scenarios: {}/{} criteria passed\n", results.size() - failed, results.size());
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-resolved pulsed-jet swimmer simulator"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI-style run configuration");
    sub->add_option("--out", f.out, "Output directory")->capture_default_str();
    sub->add_option("--dt", f.dt, "Integration step (s)");
    sub->add_option("--jobs", f.jobs, "Worker threads");
  };
  auto cycle_flags = [&](CLI::App* sub) {
    sub->add_option("--evr", f.evr, "Expelled volume ratio (%)");
    sub->add_option("--glide", f.glide, "Glide duration (s)");
    sub->add_option("--gpf", f.gpf, "Glide phase fraction (%)")->excludes("--glide");
    sub->add_option("--cycles", f.cycles, "Number of cycles");
    sub->add_flag("--valves,!--no-valves", f.valves, "Refill through inlet valves");
  };

  auto* simulate = app.add_subcommand("simulate", "Integrate a cycle schedule");
  common(simulate);
  cycle_flags(simulate);
  auto* fall = app.add_subcommand("fall", "Simulated terminal falls and C_D*A identification");
  common(fall);
  fall->add_option("--window", f.window, "Velocity smoothing window (samples)");
  auto* fitc = app.add_subcommand("fit", "Calibrate V_tot, A_nozzle, c_suction and the C_D*A scale");
  common(fitc);
  auto* sweepc = app.add_subcommand("sweep", "Sweep GPF, EVR or glide duration");
  common(sweepc);
  cycle_flags(sweepc);
  sweepc->add_option("--var", f.var, "gpf, evr or glide");
  sweepc->add_option("--grid", f.grid, "Comma-separated values");
  auto* analyze = app.add_subcommand("analyze", "Metrics of a tracked trace");
  common(analyze);
  analyze->add_option("trace", f.inputs, "t,x[,y] CSV")->required();
  analyze->add_option("--window", f.window, "Velocity smoothing window (samples)");
  analyze->add_option("--distance", f.distance, "Report time to this distance (m)");
  auto* comparec = app.add_subcommand("compare", "Simulation (or a second trace) against a reference trace");
  common(comparec);
  cycle_flags(comparec);
  comparec->add_option("traces", f.inputs, "Reference trace, optional second trace")->required();
  comparec->add_option("--window", f.window, "Velocity smoothing window (samples)");
  auto* scenarios = app.add_subcommand("scenarios", "Reproduction checks");
  common(scenarios);
  scenarios->add_flag("--paper", f.paper, "Run every reproduction criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*simulate) return run_simulate(f);
    if (*fall) return run_fall(f);
    if (*fitc) return run_fit(f);
    if (*sweepc) return run_sweep(f);
    if (*analyze) return run_analyze(f);
    if (*comparec) return run_compare(f);
    if (*scenarios) return run_scenarios(f);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
