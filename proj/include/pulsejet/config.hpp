#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pulsejet/calibrate.hpp"
#include "pulsejet/cycle.hpp"
#include "pulsejet/dynamics.hpp"

namespace pulsejet {

/// Everything a CLI workflow needs, loaded from an INI-style file whose values
/// use lab units (cm, cm^2, mL) and converted to SI here.
struct RunConfig {
  // [geometry]
  MantleGeometry geometry;
  // [hydro]
  double rho = 1000.0;
  double cd = 1.0;
  /// Explicit C_D*A knots (SI); empty means cd * A(s) at the default knots.
  std::vector<double> cda_s;
  std::vector<double> cda_values;
  double cda_scale = 1.0;
  double c_added = 0.0;
  double c_suction = 0.0;
  // [body]
  double m_struct = 0.55;
  // [schedule]
  CycleSchedule schedule;
  /// False while t_refill follows the valve setting automatically.
  bool t_refill_explicit = false;
  ActuationProfile profile = ActuationProfile::ConstantRate;
  EvrTiming evr_timing = EvrTiming::ConstantRate;
  // [energy]
  EnergyModel energy;
  // [integrator]
  double dt = 1e-3;
  int cycles = 1;
  std::optional<double> course;
  int jobs = 1;
  // [targets]
  CalibrationTargets targets = CalibrationTargets::builtin();
  int budget = 5000;
  int grid_points = 5;
  int max_cycles = 20;
  // [fall]
  double fall_force = 0.01;
  std::vector<double> fall_s{0.0, 0.25, 0.5, 0.75};
  double fall_duration = 300.0;
  // [sweep]
  SweepVariable sweep_variable = SweepVariable::GPF;
  std::vector<double> sweep_grid{0.0, 25.0, 50.0, 75.0};
  // [analysis]
  int window = 5;
  std::optional<double> distance;

  /// Geometry, hydro and body assembled and validated.
  RigidBodyParams params() const;
  /// Same as params() but with the C_D*A scale left at 1.
  RigidBodyParams unscaled_params() const;
  Scenario scenario() const;
  CalibrationBase calibration_base() const;

  /// Switches valves and, unless t_refill was set explicitly, the refill duration.
  void set_valves(bool valves);
  /// Copies a fitted vector into the corresponding fields.
  void apply_fit(const ParameterVector& x);

  /// Re-checks every owning type's invariants. Throws ConfigError.
  void validate() const;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);
/// Writes every key, so the output fully determines the run.
void write_config(std::ostream& os, const RunConfig& config);

}  // namespace pulsejet
