#pragma once

#include <string>
#include <vector>

#include "pulsejet/calibrate.hpp"
#include "pulsejet/config.hpp"
#include "pulsejet/cycle.hpp"

namespace pulsejet {

struct CalibratedModel {
  CalibrationBase base;
  FitResult fit;
  /// Base params with the fitted vector applied.
  RigidBodyParams params;
};

/// Fits the config's targets starting from its base model.
CalibratedModel calibrate(const RunConfig& config);

/// Single-cycle or course scenario on `params` with the config's energy and integrator settings.
Scenario make_scenario(const RunConfig& config, const RigidBodyParams& params, double glide,
                       bool valves);

/// Velocity lost during the first `window` seconds after the first refill onset.
/// Throws DomainError when the trajectory has no refill or ends inside the window.
double windowed_refill_drop(const Trajectory& trajectory, double window);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs every reproduction check against the config's base model and targets.
std::vector<CriterionResult> run_reproduction_checks(const RunConfig& config);

}  // namespace pulsejet
