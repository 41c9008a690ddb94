#include "pulsejet/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

CycleSchedule CycleSchedule::with_valves(double t_glide, double evr) {
  return CycleSchedule{kExpulsion, t_glide, kRefillWithValves, evr, true};
}

CycleSchedule CycleSchedule::valve_free(double t_glide, double evr) {
  return CycleSchedule{kExpulsion, t_glide, kRefillValveFree, evr, false};
}

void CycleSchedule::validate(double s_max) const {
  if (!(t_expulsion > 0.0)) {
    throw ConfigError(fmt::format("schedule: t_expulsion = {} must be > 0", t_expulsion));
  }
  if (!(t_refill > 0.0)) {
    throw ConfigError(fmt::format("schedule: t_refill = {} must be > 0", t_refill));
  }
  if (!(t_glide >= 0.0)) {
    throw ConfigError(fmt::format("schedule: t_glide = {} must be >= 0", t_glide));
  }
  if (!(evr_target >= 0.0 && evr_target <= s_max)) {
    throw ConfigError(
        fmt::format("schedule: EVR target {} outside [0, {}]", evr_target, s_max));
  }
}

double quantize_duration(double duration, double dt) {
  return std::max(1.0, std::round(duration / dt)) * dt;
}

CycleSchedule schedule_for_evr(const CycleSchedule& base, double evr, double s_max,
                               EvrTiming timing, double dt) {
  CycleSchedule schedule = base;
  schedule.evr_target = evr;
  if (timing == EvrTiming::ConstantRate) {
    schedule.t_expulsion = quantize_duration(base.t_expulsion * evr / s_max, dt);
  }
  return schedule;
}

}  // namespace pulsejet
