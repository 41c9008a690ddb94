#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsejet/dynamics.hpp"
#include "pulsejet/schedule.hpp"

namespace pulsejet {

/// EVR in percent: 100 V_exp / V_tot.
double evr(double v_exp, double v_tot);

/// GPF in percent: 100 t_glide / (t_expulsion + t_glide + t_refill).
double gpf(const CycleSchedule& schedule);

/// Glide duration giving `gpf_pct` with the schedule's expulsion and refill durations.
double glide_for_gpf(double gpf_pct, const CycleSchedule& schedule);

/// Phase-wise actuation energy. Expulsion and refill are lumped per stroke,
/// holding the contracted mantle costs P_hold per second.
struct EnergyModel {
  double E_expulsion = 2.2;
  double E_refill = 0.4;
  double P_hold = 0.364;
  /// Refill duration covered by E_refill; longer refills pay P_hold for the excess.
  double t_refill_ref = CycleSchedule::kRefillWithValves;
  /// Reference mass for the dimensionless COT. Unset means the expanded effective mass.
  std::optional<double> m_ref;
  double g = 9.81;

  void validate() const;
};

struct PhaseEnergies {
  double expulsion = 0.0;
  double glide = 0.0;
  double refill = 0.0;
  double total() const { return expulsion + glide + refill; }
};

PhaseEnergies phase_energies(const CycleSchedule& schedule, const EnergyModel& em);

/// Energy of one full cycle.
double cycle_energy(const CycleSchedule& schedule, const EnergyModel& em);

/// Energy spent from t = 0 to `t` of a repeating schedule, with each phase's
/// energy spread uniformly over the phase.
double energy_until(double t, const CycleSchedule& schedule, const EnergyModel& em);

struct CostOfTransport {
  double dimensionless = 0.0;
  /// J/m
  double specific = 0.0;
};

/// COT for `energy` spent over `distance`. Requires em.m_ref to be set.
CostOfTransport cot(double energy, double distance, const EnergyModel& em);

enum class LedgerStatus { Ok, NoDistance, CourseNotReached, Fault };

std::string_view status_name(LedgerStatus status);

struct EnergyLedger {
  PhaseEnergies energy;
  double E_total = 0.0;
  double distance = 0.0;
  double duration = 0.0;
  double cot_dimensionless = 0.0;
  double cot_specific = 0.0;
  double avg_speed = 0.0;
  double peak_speed = 0.0;
  double refill_onset_speed = 0.0;
  /// Velocity lost over the first refill phase.
  double refill_drop = 0.0;
  double end_speed = 0.0;
  LedgerStatus status = LedgerStatus::Ok;
  std::string message;

  bool cot_defined() const { return status == LedgerStatus::Ok; }
};

/// Everything run_scenario needs.
struct Scenario {
  CycleSchedule schedule;
  RigidBodyParams params;
  EnergyModel energy;
  int n_cycles = 1;
  double dt = 1e-3;
  ActuationProfile profile = ActuationProfile::ConstantRate;
  EvrTiming evr_timing = EvrTiming::ConstantRate;
  /// When set, cycles repeat (up to n_cycles) until x reaches the course length
  /// and the ledger covers the motion up to the crossing time.
  std::optional<double> course;
};

struct ScenarioResult {
  EnergyLedger ledger;
  Trajectory trajectory;
};

/// Simulates the scenario and fills the ledger. A zero distance is reported
/// through the ledger status rather than thrown.
ScenarioResult run_scenario(const Scenario& scenario);

/// First time the trajectory reaches x = distance, by linear interpolation.
std::optional<double> time_to_distance(const Trajectory& trajectory, double distance);

enum class SweepVariable { GPF, EVR, GlideDuration };

std::string_view variable_name(SweepVariable variable);
SweepVariable parse_sweep_variable(std::string_view name);

/// Scenario with `variable` set to `value` (GPF and EVR in percent, glide in s).
Scenario apply_variable(const Scenario& base, SweepVariable variable, double value);

struct SweepRow {
  double value = 0.0;
  double gpf_pct = 0.0;
  double evr_pct = 0.0;
  EnergyLedger ledger;
};

/// One independent scenario per grid value, ordered by grid index. Failures
/// are recorded in the row's ledger status.
std::vector<SweepRow> sweep(SweepVariable variable, const std::vector<double>& grid,
                            const Scenario& base, int jobs = 1);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

enum class Objective { MinCOT, MaxAvgSpeed };

struct OptimumResult {
  double value = 0.0;
  double objective = 0.0;
  EnergyLedger ledger;
  /// Optimizer sits at (or within tolerance of) a bracket end.
  bool boundary = false;
  /// The objective was constant over the bracket.
  bool flat = false;
  int evaluations = 0;
};

/// Golden-section search over [lo, hi], to `tolerance` of the bracket width.
OptimumResult find_optimum(Objective objective, SweepVariable variable, double lo, double hi,
                           const Scenario& base, double tolerance = 0.01);

}  // namespace pulsejet
