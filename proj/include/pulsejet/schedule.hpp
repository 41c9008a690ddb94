#pragma once

namespace pulsejet {

/// Commanded durations of one expulsion-glide-refill cycle.
struct CycleSchedule {
  static constexpr double kExpulsion = 0.55;
  static constexpr double kRefillWithValves = 0.55;
  static constexpr double kRefillValveFree = 1.10;

  double t_expulsion = kExpulsion;
  double t_glide = 0.0;
  double t_refill = kRefillWithValves;
  /// Contraction reached at the end of expulsion; equals the EVR as a fraction.
  double evr_target = 0.75;
  bool valves = true;

  /// Valve-free refill takes twice the with-valve duration.
  static CycleSchedule with_valves(double t_glide, double evr = 0.75);
  static CycleSchedule valve_free(double t_glide, double evr = 0.75);

  double period() const { return t_expulsion + t_glide + t_refill; }

  /// Throws ConfigError when a duration or the EVR target is invalid.
  void validate(double s_max) const;
};

/// How the expulsion duration follows the EVR target when the EVR is varied.
enum class EvrTiming {
  /// t_expulsion is kept as commanded.
  ConstantDuration,
  /// The servo contracts at a fixed rate: t_expulsion is the duration of a
  /// full s_max stroke and shorter strokes take proportionally less time.
  ConstantRate,
};

/// Round `duration` to the nearest multiple of `dt`, never below one step.
double quantize_duration(double duration, double dt);

/// Copy of `base` retargeted to `evr` under the given timing rule.
CycleSchedule schedule_for_evr(const CycleSchedule& base, double evr, double s_max,
                               EvrTiming timing, double dt);

}  // namespace pulsejet
