#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pulsejet/geometry.hpp"
#include "pulsejet/hydro.hpp"
#include "pulsejet/schedule.hpp"

namespace pulsejet {

enum class Phase { Expulsion, Glide, Refill, Hold };

std::string_view phase_name(Phase phase);

struct BodyState {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double s = 0.0;
  double V = 0.0;
  Phase phase = Phase::Expulsion;
};

struct RigidBodyParams {
  double m_struct = 0.55;
  MantleGeometry geometry;
  HydroParams hydro = HydroParams::defaults(geometry);

  void validate() const;
};

struct PhaseMarker {
  /// Index of the first state integrated in this phase.
  std::size_t index = 0;
  Phase phase = Phase::Expulsion;
  int cycle = 0;
};

/// States sampled every dt starting at t = 0, x = 0.
struct Trajectory {
  std::vector<BodyState> states;
  std::vector<PhaseMarker> markers;
  double dt = 0.0;
  int cycles = 0;

  const BodyState& front() const { return states.front(); }
  const BodyState& back() const { return states.back(); }
  std::size_t size() const { return states.size(); }

  Eigen::VectorXd times() const;
  Eigen::VectorXd positions() const;
  Eigen::VectorXd velocities() const;
  double peak_speed() const;
  /// Velocity at the start of the first refill phase, if one exists.
  std::optional<double> refill_onset_speed() const;
};

enum class ActuationProfile { ConstantRate, Smoothstep };

struct SimulationOptions {
  ActuationProfile profile = ActuationProfile::ConstantRate;
  double v0 = 0.0;
  /// Stop after the first cycle that ends with x >= stop_distance.
  std::optional<double> stop_distance;
};

/// m(t) = m_struct + rho V(t) + c_added rho V_tot
double effective_mass(const BodyState& state, const RigidBodyParams& p);

/// Jet momentum flux rho Q^2 / A_nozzle.
template <typename Scalar>
Scalar jet_thrust(const Scalar& rho, const Scalar& q, const Scalar& a_nozzle) {
  return rho * q * q / a_nozzle;
}

/// Net surge force while expelling at volume rate Q (>= 0): jet thrust minus drag.
double expulsion_force(const BodyState& state, double q, const RigidBodyParams& p);

/// Drag-only coasting force.
double glide_force(const BodyState& state, const RigidBodyParams& p);

/// Retarding contributions during refill. Each term is a magnitude-signed force
/// acting against the direction of motion.
struct RefillForce {
  double momentum_transfer = 0.0;
  double suction = 0.0;
  double drag = 0.0;
  double net() const { return -(momentum_transfer + suction + drag); }
};

/// Speed scale of the smooth sign v / sqrt(v^2 + scale^2) applied to the
/// suction loss, so the loss vanishes with the motion instead of reversing it.
inline constexpr double kSuctionSpeedScale = 1e-3;

RefillForce refill_force_terms(const BodyState& state, double q_in, double a_in,
                               const RigidBodyParams& p);

/// Net surge force during refill at intake rate Q_in through area A_in.
double refill_force(const BodyState& state, double q_in, double a_in, const RigidBodyParams& p);

/// Integrates n_cycles of `schedule` with classical RK4 at fixed step dt.
/// Every phase duration must be an integer multiple of dt.
Trajectory simulate(const CycleSchedule& schedule, const RigidBodyParams& p, int n_cycles,
                    double dt, const SimulationOptions& options = {});

/// Vertical fall at fixed contraction s under net downward force F_net.
/// Position and velocity are positive downward.
Trajectory simulate_fall(const RigidBodyParams& p, double f_net, double s, double dt,
                         double duration = 30.0);

}  // namespace pulsejet
