#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pulsejet/dynamics.hpp"
#include "pulsejet/schedule.hpp"

namespace pulsejet {

/// Fitted unknowns, in order: V_tot [m^3], A_nozzle [m^2], c_suction, C_D*A scale.
using ParameterVector = Eigen::Vector4d;

inline constexpr int kParameterCount = 4;
const std::vector<std::string>& parameter_names();

struct ParameterBounds {
  ParameterVector lower{0.1e-3, 0.2e-4, 0.0, 0.3};
  ParameterVector upper{1.5e-3, 5.0e-4, 5.0, 3.0};

  bool contains(const ParameterVector& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
  ParameterVector clamp(const ParameterVector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  ParameterVector to_unit(const ParameterVector& x) const {
    return (x - lower).cwiseQuotient(upper - lower);
  }
  ParameterVector from_unit(const ParameterVector& u) const {
    return lower + u.cwiseProduct(upper - lower);
  }
};

struct PeakSpeedTarget {
  double evr_pct;
  double speed;
};

struct TransitTarget {
  double evr_pct;
  double distance;
  double time;
};

/// Velocity at the end of a single with-valve cycle at the given GPF, and
/// optionally the velocity at refill onset.
struct RefillTarget {
  double gpf_pct;
  std::optional<double> onset;
  double end;
};

struct CalibrationTargets {
  std::vector<PeakSpeedTarget> peak_speeds;
  std::vector<TransitTarget> transit;
  std::vector<RefillTarget> refill;
  double peak_weight = 1.0;
  double transit_weight = 1.0;
  double refill_weight = 1.0;

  /// Peak speeds and 0.5 m transit times of the first-cycle EVR experiments.
  static CalibrationTargets builtin();

  void validate() const;
};

/// Fixed parts of the model the fitted vector is applied to.
struct CalibrationBase {
  /// Supplies m_struct, rho, c_added, A_valve, s_max and the unscaled C_D*A table.
  RigidBodyParams params;
  /// With-valve, no-glide schedule; t_expulsion is the full-stroke duration under
  /// constant-rate timing.
  CycleSchedule schedule = CycleSchedule::with_valves(0.0);
  EvrTiming evr_timing = EvrTiming::ConstantRate;
  ActuationProfile profile = ActuationProfile::ConstantRate;
  double dt = 1e-3;
  /// Cycle cap for transit simulations.
  int max_cycles = 20;
  ParameterBounds bounds;
};

/// Base params with the fitted vector applied.
RigidBodyParams apply_parameters(const ParameterVector& x, const CalibrationBase& base);

/// The fitted vector read back out of a parameter set (C_D*A scale relative to `reference`).
ParameterVector extract_parameters(const RigidBodyParams& params, const RigidBodyParams& reference);

struct Residual {
  std::string label;
  double target = 0.0;
  double simulated = 0.0;
  /// (simulated - target) / target
  double relative = 0.0;
  double weight = 1.0;
};

struct LossEvaluation {
  double value = 0.0;
  bool fault = false;
  std::vector<Residual> residuals;
};

inline constexpr double kFaultLoss = 1e6;

/// Weighted sum of squared relative residuals. A simulation fault yields
/// kFaultLoss with the fault flag set. Throws DomainError out of bounds.
LossEvaluation evaluate_loss(const ParameterVector& x, const CalibrationTargets& targets,
                             const CalibrationBase& base);

double loss(const ParameterVector& x, const CalibrationTargets& targets, const CalibrationBase& base);

struct FitOptions {
  int grid_points = 5;
  /// Stop when the simplex's relative loss spread falls below this.
  double tolerance = 1e-6;
  /// Simplex refinements started from the lowest grid points.
  int starts = 4;
  int jobs = 1;
};

struct FitResult {
  ParameterVector params = ParameterVector::Zero();
  std::vector<Residual> residuals;
  double loss = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  /// (iteration, best loss so far)
  std::vector<std::pair<int, double>> log;
};

/// Grid seeding followed by bounded Nelder-Mead refinement. Deterministic.
FitResult fit(const CalibrationTargets& targets, const CalibrationBase& base, int budget,
              const FitOptions& options = {});

}  // namespace pulsejet
