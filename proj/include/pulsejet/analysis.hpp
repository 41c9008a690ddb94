#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pulsejet/dynamics.hpp"
#include "pulsejet/schedule.hpp"
#include "pulsejet/trace.hpp"

namespace pulsejet {

struct IngestOptions {
  char delimiter = ',';
  /// Column names accepted for time and position when a header row is present.
  std::vector<std::string> time_columns{"t", "t_s", "time"};
  std::vector<std::string> position_columns{"x", "x_m"};
  std::vector<std::string> lateral_columns{"y", "y_m"};
};

/// Reads a t, x [, y] table. A header row is optional; '#' starts a comment
/// line. Throws ParseError (with the line number) on malformed rows or
/// non-increasing time, DomainError on fewer than 3 samples.
Trace ingest(std::istream& is, const IngestOptions& options = {}, std::string source = {});
Trace ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Writes "t,x" rows with `digits` significant digits.
void emit(std::ostream& os, const Trace& trace, int digits = 10);

/// One row per state: t_s, x_m, v_mps, s, V_m3, phase. Values are written with
/// round-trip precision.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// Trace view (t, x) of a simulated trajectory.
Trace to_trace(const Trajectory& trajectory, std::string source = "simulation");

struct PhaseDelta {
  Phase phase = Phase::Expulsion;
  int cycle = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double dv = 0.0;
};

struct MetricsReport {
  double peak_speed = 0.0;
  double avg_speed = 0.0;
  double distance = 0.0;
  double duration = 0.0;
  std::vector<PhaseDelta> phase_deltas;
  std::optional<double> refill_onset_speed;
  std::optional<double> time_to_distance;
};

struct MetricsOptions {
  int window = 5;
  std::optional<CycleSchedule> schedule;
  std::optional<double> query_distance;
};

/// Throws RangeError when the query distance is not reached within the trace.
MetricsReport metrics(const Trace& trace, const MetricsOptions& options = {});

void write_report(std::ostream& os, const MetricsReport& report);

struct ComparisonReport {
  double t_begin = 0.0;
  double t_end = 0.0;
  Eigen::Index samples = 0;
  double rmse_x = 0.0;
  double max_error_x = 0.0;
  double rmse_v = 0.0;
  double max_error_v = 0.0;
  double rel_peak_speed = 0.0;
  double rel_avg_speed = 0.0;
  double rel_distance = 0.0;
};

/// Linear interpolation of (xs, ys) at xq, clamped at the ends.
Eigen::VectorXd interpolate(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                            const Eigen::VectorXd& xq);

/// Resamples `other` onto the timestamps of `reference` inside the overlap of
/// the two time ranges. Velocities are the recorded ones where given,
/// otherwise estimated with velocity(trace, window). Relative metric
/// differences are (other - reference) / reference. Throws DomainError when
/// the ranges are disjoint.
ComparisonReport compare(const Trace& reference, const Eigen::VectorXd& reference_v,
                         const Trace& other, const Eigen::VectorXd& other_v);
ComparisonReport compare(const Trace& reference, const Trace& other, int window = 5);
/// Experiment is the reference timeline; the simulation supplies its exact velocity.
ComparisonReport compare(const Trajectory& sim, const Trace& exp, int window = 5);

void write_report(std::ostream& os, const ComparisonReport& report);

}  // namespace pulsejet
