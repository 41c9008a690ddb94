#include "pulsejet/cycle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double evr(double v_exp, double v_tot) {
  if (!(v_tot > 0.0)) throw DomainError(fmt::format("evr: V_tot = {} must be > 0", v_tot));
  if (!(v_exp >= 0.0 && v_exp <= v_tot)) {
    throw DomainError(fmt::format("evr: V_exp = {} outside [0, V_tot = {}]", v_exp, v_tot));
  }
  return 100.0 * v_exp / v_tot;
}

double gpf(const CycleSchedule& schedule) {
  if (!(schedule.t_expulsion > 0.0 && schedule.t_refill > 0.0)) {
    throw DomainError(fmt::format("gpf: expulsion ({}) and refill ({}) durations must be > 0",
                                  schedule.t_expulsion, schedule.t_refill));
  }
  if (!(schedule.t_glide >= 0.0)) {
    throw DomainError(fmt::format("gpf: glide duration {} must be >= 0", schedule.t_glide));
  }
  return 100.0 * schedule.t_glide / schedule.period();
}

double glide_for_gpf(double gpf_pct, const CycleSchedule& schedule) {
  if (!(gpf_pct >= 0.0 && gpf_pct < 100.0)) {
    throw DomainError(fmt::format("GPF {}% outside [0, 100)", gpf_pct));
  }
  const double f = gpf_pct / 100.0;
  return f / (1.0 - f) * (schedule.t_expulsion + schedule.t_refill);
}

void EnergyModel::validate() const {
  if (!(E_expulsion >= 0.0 && E_refill >= 0.0 && P_hold >= 0.0 && t_refill_ref >= 0.0)) {
    throw ConfigError("energy: E_expulsion, E_refill, P_hold and t_refill_ref must be >= 0");
  }
  if (m_ref && !(*m_ref > 0.0)) throw ConfigError("energy: m_ref must be > 0");
  if (!(g > 0.0)) throw ConfigError("energy: g must be > 0");
}

PhaseEnergies phase_energies(const CycleSchedule& schedule, const EnergyModel& em) {
  PhaseEnergies e;
  e.expulsion = em.E_expulsion;
  e.glide = em.P_hold * schedule.t_glide;
  e.refill = em.E_refill + em.P_hold * std::max(0.0, schedule.t_refill - em.t_refill_ref);
  return e;
}

double cycle_energy(const CycleSchedule& schedule, const EnergyModel& em) {
  return phase_energies(schedule, em).total();
}

namespace {

PhaseEnergies energy_breakdown_until(double t, const CycleSchedule& schedule,
                                     const EnergyModel& em) {
  const PhaseEnergies per_cycle = phase_energies(schedule, em);
  const double period = schedule.period();
  const double whole = std::floor(t / period);
  double rem = t - whole * period;

  PhaseEnergies e{whole * per_cycle.expulsion, whole * per_cycle.glide, whole * per_cycle.refill};
  const double in_exp = std::min(rem, schedule.t_expulsion);
  e.expulsion += per_cycle.expulsion * in_exp / schedule.t_expulsion;
  rem -= in_exp;
  const double in_glide = std::min(rem, schedule.t_glide);
  e.glide += em.P_hold * in_glide;
  rem -= in_glide;
  const double in_refill = std::min(rem, schedule.t_refill);
  e.refill += per_cycle.refill * in_refill / schedule.t_refill;
  return e;
}

}  // namespace

double energy_until(double t, const CycleSchedule& schedule, const EnergyModel& em) {
  return energy_breakdown_until(t, schedule, em).total();
}

CostOfTransport cot(double energy, double distance, const EnergyModel& em) {
  if (!(distance > 0.0)) throw DomainError(fmt::format("cot: distance = {} must be > 0", distance));
  if (!em.m_ref) throw ConfigError("cot: reference mass is not set");
  return {energy / (*em.m_ref * em.g * distance), energy / distance};
}

std::string_view status_name(LedgerStatus status) {
  switch (status) {
    case LedgerStatus::Ok: return "ok";
    case LedgerStatus::NoDistance: return "no_distance";
    case LedgerStatus::CourseNotReached: return "course_not_reached";
    case LedgerStatus::Fault: return "fault";
  }
  return "unknown";
}

std::optional<double> time_to_distance(const Trajectory& trajectory, double distance) {
  const auto& st = trajectory.states;
  if (st.empty()) return std::nullopt;
  if (st.front().x >= distance) return st.front().t;
  for (std::size_t i = 1; i < st.size(); ++i) {
    if (st[i].x >= distance) {
      const double w = (distance - st[i - 1].x) / (st[i].x - st[i - 1].x);
      return st[i - 1].t + w * (st[i].t - st[i - 1].t);
    }
  }
  return std::nullopt;
}

ScenarioResult run_scenario(const Scenario& scenario) {
  EnergyModel em = scenario.energy;
  const auto& p = scenario.params;
  if (!em.m_ref) {
    em.m_ref = p.m_struct + p.hydro.rho * p.geometry.V_tot * (1.0 + p.hydro.c_added);
  }
  em.validate();

  SimulationOptions options;
  options.profile = scenario.profile;
  options.stop_distance = scenario.course;
  ScenarioResult result;
  result.trajectory = simulate(scenario.schedule, p, scenario.n_cycles, scenario.dt, options);
  const Trajectory& traj = result.trajectory;
  EnergyLedger& ledger = result.ledger;

  double t_end = traj.back().t;
  std::size_t last = traj.size() - 1;
  ledger.distance = traj.back().x;
  ledger.end_speed = traj.back().v;
  if (scenario.course) {
    if (const auto t_cross = time_to_distance(traj, *scenario.course)) {
      t_end = *t_cross;
      ledger.distance = *scenario.course;
      while (last > 0 && traj.states[last - 1].t >= t_end) --last;
      ledger.end_speed = traj.states[last].v;
    } else {
      ledger.status = LedgerStatus::CourseNotReached;
      ledger.message = fmt::format("course of {} m not reached in {} cycles", *scenario.course,
                                   traj.cycles);
    }
  }
  ledger.duration = t_end;
  ledger.energy = energy_breakdown_until(t_end, scenario.schedule, em);
  ledger.E_total = ledger.energy.total();
  ledger.avg_speed = ledger.distance / ledger.duration;
  for (std::size_t i = 0; i <= last; ++i) {
    ledger.peak_speed = std::max(ledger.peak_speed, traj.states[i].v);
  }

  ledger.refill_onset_speed = kNaN;
  ledger.refill_drop = kNaN;
  for (std::size_t m = 0; m < traj.markers.size(); ++m) {
    if (traj.markers[m].phase != Phase::Refill) continue;
    const std::size_t begin = traj.markers[m].index - 1;
    const std::size_t end =
        m + 1 < traj.markers.size() ? traj.markers[m + 1].index - 1 : traj.size() - 1;
    ledger.refill_onset_speed = traj.states[begin].v;
    ledger.refill_drop = traj.states[begin].v - traj.states[end].v;
    break;
  }

  if (ledger.distance > 0.0) {
    const CostOfTransport c = cot(ledger.E_total, ledger.distance, em);
    ledger.cot_dimensionless = c.dimensionless;
    ledger.cot_specific = c.specific;
  } else {
    ledger.cot_dimensionless = kNaN;
    ledger.cot_specific = kNaN;
    if (ledger.status == LedgerStatus::Ok) {
      ledger.status = LedgerStatus::NoDistance;
      ledger.message = "no forward distance; COT undefined";
    }
  }
  return result;
}

std::string_view variable_name(SweepVariable variable) {
  switch (variable) {
    case SweepVariable::GPF: return "gpf";
    case SweepVariable::EVR: return "evr";
    case SweepVariable::GlideDuration: return "glide";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "gpf") return SweepVariable::GPF;
  if (name == "evr") return SweepVariable::EVR;
  if (name == "glide") return SweepVariable::GlideDuration;
  throw ConfigError(fmt::format("unknown sweep variable '{}' (expected gpf, evr or glide)", name));
}

Scenario apply_variable(const Scenario& base, SweepVariable variable, double value) {
  Scenario s = base;
  const double dt = base.dt;
  switch (variable) {
    case SweepVariable::GPF:
      s.schedule.t_glide = std::round(glide_for_gpf(value, base.schedule) / dt) * dt;
      break;
    case SweepVariable::GlideDuration:
      if (!(value >= 0.0)) throw DomainError(fmt::format("glide duration {} must be >= 0", value));
      s.schedule.t_glide = std::round(value / dt) * dt;
      break;
    case SweepVariable::EVR: {
      const double evr_frac = value / 100.0;
      const double s_max = base.params.geometry.s_max;
      if (!(evr_frac >= 0.0 && evr_frac <= s_max)) {
        throw DomainError(fmt::format("EVR {}% outside [0, {}]%", value, 100.0 * s_max));
      }
      s.schedule = schedule_for_evr(base.schedule, evr_frac, s_max, base.evr_timing, dt);
      break;
    }
  }
  return s;
}

std::vector<SweepRow> sweep(SweepVariable variable, const std::vector<double>& grid,
                            const Scenario& base, int jobs) {
  if (grid.empty()) throw DomainError("sweep: grid is empty");
  std::vector<SweepRow> rows(grid.size());
  auto evaluate = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = grid[i];
    row.gpf_pct = kNaN;
    row.evr_pct = kNaN;
    try {
      const Scenario s = apply_variable(base, variable, grid[i]);
      row.gpf_pct = gpf(s.schedule);
      row.evr_pct = 100.0 * s.schedule.evr_target;
      row.ledger = run_scenario(s).ledger;
    } catch (const std::exception& e) {
      row.ledger = EnergyLedger{};
      row.ledger.status = LedgerStatus::Fault;
      row.ledger.message = e.what();
      row.ledger.cot_specific = kNaN;
      row.ledger.cot_dimensionless = kNaN;
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)),
                                                      1, grid.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) evaluate(i);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "variable_value,gpf_pct,evr_pct,distance_m,duration_s,avg_speed_mps,peak_speed_mps,"
        "refill_onset_mps,E_total_J,cot_J_per_m,cot_dimensionless,status\n";
  for (const auto& r : rows) {
    const auto& l = r.ledger;
    fmt::print(os, "{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{}\n",
               r.value, r.gpf_pct, r.evr_pct, l.distance, l.duration, l.avg_speed, l.peak_speed,
               l.refill_onset_speed, l.E_total, l.cot_specific, l.cot_dimensionless,
               status_name(l.status));
  }
}

OptimumResult find_optimum(Objective objective, SweepVariable variable, double lo, double hi,
                           const Scenario& base, double tolerance) {
  if (!(hi > lo)) throw DomainError(fmt::format("find_optimum: empty bracket [{}, {}]", lo, hi));
  OptimumResult out;
  auto evaluate = [&](double x) {
    ++out.evaluations;
    EnergyLedger ledger = run_scenario(apply_variable(base, variable, x)).ledger;
    double f;
    if (objective == Objective::MinCOT) {
      f = ledger.cot_defined() ? ledger.cot_specific : std::numeric_limits<double>::infinity();
    } else {
      f = -ledger.avg_speed;
    }
    return std::pair{f, ledger};
  };

  constexpr double kInvPhi = 0.6180339887498949;
  const double width = hi - lo;
  auto [f_lo, l_lo] = evaluate(lo);
  auto [f_hi, l_hi] = evaluate(hi);
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  auto [fc, lc] = evaluate(c);
  auto [fd, ld] = evaluate(d);

  const double f_min = std::min({f_lo, f_hi, fc, fd});
  const double f_max = std::max({f_lo, f_hi, fc, fd});
  if (f_max - f_min <= 1e-12 * std::max(1.0, std::abs(f_max))) {
    out.value = 0.5 * (lo + hi);
    std::tie(out.objective, out.ledger) = evaluate(out.value);
    out.flat = true;
    if (objective == Objective::MaxAvgSpeed) out.objective = -out.objective;
    return out;
  }

  while (b - a > tolerance * width) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      std::tie(fc, lc) = evaluate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      std::tie(fd, ld) = evaluate(d);
    }
  }
  out.value = 0.5 * (a + b);
  std::tie(out.objective, out.ledger) = evaluate(out.value);
  if (f_lo <= out.objective) {
    out.value = lo;
    out.objective = f_lo;
    out.ledger = l_lo;
  } else if (f_hi <= out.objective) {
    out.value = hi;
    out.objective = f_hi;
    out.ledger = l_hi;
  }
  out.boundary = out.value - lo <= tolerance * width || hi - out.value <= tolerance * width;
  if (objective == Objective::MaxAvgSpeed) out.objective = -out.objective;
  return out;
}

}  // namespace pulsejet
