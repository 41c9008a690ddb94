#include "pulsejet/calibrate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "pulsejet/cycle.hpp"
#include "pulsejet/errors.hpp"

namespace pulsejet {

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names{"V_tot", "A_nozzle", "c_suction", "cda_scale"};
  return names;
}

CalibrationTargets CalibrationTargets::builtin() {
  CalibrationTargets t;
  t.peak_speeds = {{25.0, 0.21}, {50.0, 0.33}, {75.0, 0.39}};
  t.transit = {{25.0, 0.5, 2.9}, {50.0, 0.5, 2.2}, {75.0, 0.5, 2.1}};
  return t;
}

void CalibrationTargets::validate() const {
  if (peak_speeds.empty() && transit.empty() && refill.empty()) {
    throw ConfigError("targets: no calibration targets");
  }
  for (const auto& p : peak_speeds) {
    if (!(p.speed > 0.0)) throw ConfigError(fmt::format("targets: peak speed {} must be > 0", p.speed));
  }
  for (const auto& t : transit) {
    if (!(t.time > 0.0 && t.distance > 0.0)) {
      throw ConfigError("targets: transit distance and time must be > 0");
    }
  }
  for (const auto& r : refill) {
    if (!(r.end > 0.0) || (r.onset && !(*r.onset > 0.0))) {
      throw ConfigError("targets: refill speeds must be > 0");
    }
  }
  if (!(peak_weight >= 0.0 && transit_weight >= 0.0 && refill_weight >= 0.0)) {
    throw ConfigError("targets: weights must be >= 0");
  }
}

RigidBodyParams apply_parameters(const ParameterVector& x, const CalibrationBase& base) {
  RigidBodyParams p = base.params;
  p.geometry.V_tot = x(0);
  p.geometry.A_nozzle = x(1);
  p.hydro.c_suction = x(2);
  p.hydro = p.hydro.with_cda_scale(x(3));
  return p;
}

ParameterVector extract_parameters(const RigidBodyParams& params, const RigidBodyParams& reference) {
  return ParameterVector(params.geometry.V_tot, params.geometry.A_nozzle, params.hydro.c_suction,
                         params.hydro.cda_table.values().front() /
                             reference.hydro.cda_table.values().front());
}

namespace {

Residual make_residual(std::string label, double target, double simulated, double weight) {
  return {std::move(label), target, simulated, (simulated - target) / target, weight};
}

double first_cycle_peak(const Trajectory& traj) {
  std::size_t end = traj.size();
  for (const auto& m : traj.markers) {
    if (m.cycle > 0) {
      end = m.index;
      break;
    }
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < end; ++i) peak = std::max(peak, traj.states[i].v);
  return peak;
}

}  // namespace

LossEvaluation evaluate_loss(const ParameterVector& x, const CalibrationTargets& targets,
                             const CalibrationBase& base) {
  if (!base.bounds.contains(x)) {
    throw DomainError(fmt::format("loss: parameters ({}, {}, {}, {}) outside bounds", x(0), x(1),
                                  x(2), x(3)));
  }
  const RigidBodyParams p = apply_parameters(x, base);
  const double s_max = p.geometry.s_max;
  SimulationOptions options;
  options.profile = base.profile;

  LossEvaluation out;
  try {
    // One simulation per EVR serves both its peak-speed and transit targets.
    std::map<double, std::pair<double, std::optional<Trajectory>>> by_evr;
    for (const auto& t : targets.peak_speeds) by_evr[t.evr_pct].first = 0.0;
    for (const auto& t : targets.transit) {
      by_evr[t.evr_pct].first = std::max(by_evr[t.evr_pct].first, t.distance);
    }
    for (auto& [evr_pct, entry] : by_evr) {
      const CycleSchedule sched =
          schedule_for_evr(base.schedule, evr_pct / 100.0, s_max, base.evr_timing, base.dt);
      SimulationOptions opt = options;
      int cycles = 1;
      if (entry.first > 0.0) {
        opt.stop_distance = entry.first;
        cycles = base.max_cycles;
      }
      entry.second = simulate(sched, p, cycles, base.dt, opt);
    }
    for (const auto& t : targets.peak_speeds) {
      const double peak = first_cycle_peak(*by_evr[t.evr_pct].second);
      out.residuals.push_back(
          make_residual(fmt::format("peak_speed@{}", t.evr_pct), t.speed, peak, targets.peak_weight));
    }
    for (const auto& t : targets.transit) {
      const Trajectory& traj = *by_evr[t.evr_pct].second;
      const double time = time_to_distance(traj, t.distance).value_or(traj.back().t);
      out.residuals.push_back(make_residual(fmt::format("transit@{}", t.evr_pct), t.time, time,
                                            targets.transit_weight));
    }
    for (const auto& t : targets.refill) {
      CycleSchedule sched = base.schedule;
      sched.t_glide = std::round(glide_for_gpf(t.gpf_pct, sched) / base.dt) * base.dt;
      const Trajectory traj = simulate(sched, p, 1, base.dt, options);
      if (t.onset) {
        out.residuals.push_back(make_residual(fmt::format("refill_onset@{}", t.gpf_pct), *t.onset,
                                              traj.refill_onset_speed().value_or(0.0),
                                              targets.refill_weight));
      }
      out.residuals.push_back(make_residual(fmt::format("cycle_end@{}", t.gpf_pct), t.end,
                                            traj.back().v, targets.refill_weight));
    }
  } catch (const IntegrationFault&) {
    out.value = kFaultLoss;
    out.fault = true;
    return out;
  }

  // Summed in sorted order so the value does not depend on target order.
  std::vector<double> terms;
  terms.reserve(out.residuals.size());
  for (const auto& r : out.residuals) terms.push_back(r.weight * r.relative * r.relative);
  std::sort(terms.begin(), terms.end());
  out.value = std::accumulate(terms.begin(), terms.end(), 0.0);
  if (!std::isfinite(out.value)) {
    out.value = kFaultLoss;
    out.fault = true;
  }
  return out;
}

double loss(const ParameterVector& x, const CalibrationTargets& targets, const CalibrationBase& base) {
  return evaluate_loss(x, targets, base).value;
}

namespace {

constexpr double kOutsidePenalty = 1e3;

/// Loss over the unit cube, with an evaluation budget.
class BudgetedObjective {
 public:
  BudgetedObjective(const CalibrationTargets& targets, const CalibrationBase& base, int budget)
      : targets_(targets), base_(base), budget_(budget) {}

  double operator()(const ParameterVector& unit) {
    ++used_;
    return raw(unit);
  }
  // Points outside the unit cube are scored at their projection plus a quadratic penalty.
  // Clamping alone would let a simplex collapse onto a face and stall there.
  double raw(const ParameterVector& unit) const {
    const ParameterVector inside = unit.cwiseMax(0.0).cwiseMin(1.0);
    const ParameterVector x = base_.bounds.clamp(base_.bounds.from_unit(inside));
    return loss(x, targets_, base_) + kOutsidePenalty * (unit - inside).squaredNorm();
  }
  bool exhausted() const { return used_ >= budget_; }
  int remaining() const { return budget_ - used_; }
  int used() const { return used_; }
  void charge(int n) { used_ += n; }

 private:
  const CalibrationTargets& targets_;
  const CalibrationBase& base_;
  int budget_;
  int used_ = 0;
};

constexpr int kVertices = kParameterCount + 1;
using Simplex = Eigen::Matrix<double, kParameterCount, kVertices>;
using SimplexValues = Eigen::Matrix<double, kVertices, 1>;

ParameterVector unit_clamp(const ParameterVector& u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

void order(Simplex& simplex, SimplexValues& values) {
  std::array<int, kVertices> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values(a) < values(b); });
  const Simplex s = simplex;
  const SimplexValues v = values;
  for (int i = 0; i < kVertices; ++i) {
    simplex.col(i) = s.col(idx[i]);
    values(i) = v(idx[i]);
  }
}

struct SimplexOutcome {
  ParameterVector best;
  double value;
  bool converged;
};

SimplexOutcome nelder_mead(BudgetedObjective& f, const ParameterVector& start, double start_value,
                           double step, double tolerance, int& iterations,
                           std::vector<std::pair<int, double>>& log) {
  Simplex simplex;
  SimplexValues values;
  simplex.col(0) = start;
  values(0) = start_value;
  for (int i = 0; i < kParameterCount; ++i) {
    ParameterVector v = start;
    v(i) += v(i) + step <= 1.0 ? step : -step;
    simplex.col(i + 1) = v;
    if (f.exhausted()) return {start, start_value, false};
    values(i + 1) = f(v);
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  while (true) {
    order(simplex, values);
    const double spread = values(kVertices - 1) - values(0);
    if (spread <= tolerance * std::abs(values(0)) + 1e-14) {
      return {simplex.col(0), values(0), true};
    }
    if (f.exhausted()) return {simplex.col(0), values(0), false};
    ++iterations;

    const ParameterVector centroid = simplex.leftCols(kParameterCount).rowwise().mean();
    const ParameterVector worst = simplex.col(kVertices - 1);
    const ParameterVector xr = centroid + kReflect * (centroid - worst);
    const double fr = f(xr);
    if (fr < values(0)) {
      if (f.exhausted()) {
        simplex.col(kVertices - 1) = xr;
        values(kVertices - 1) = fr;
      } else {
        const ParameterVector xe = centroid + kExpand * (xr - centroid);
        const double fe = f(xe);
        simplex.col(kVertices - 1) = fe < fr ? xe : xr;
        values(kVertices - 1) = std::min(fe, fr);
      }
    } else if (fr < values(kVertices - 2)) {
      simplex.col(kVertices - 1) = xr;
      values(kVertices - 1) = fr;
    } else {
      if (f.exhausted()) break;
      const bool outside = fr < values(kVertices - 1);
      const ParameterVector xc = centroid + kContract * ((outside ? xr : worst) - centroid);
      const double fc = f(xc);
      if (fc < (outside ? fr : values(kVertices - 1))) {
        simplex.col(kVertices - 1) = xc;
        values(kVertices - 1) = fc;
      } else {
        for (int i = 1; i < kVertices; ++i) {
          if (f.exhausted()) break;
          simplex.col(i) = simplex.col(0) + kShrink * (simplex.col(i) - simplex.col(0));
          values(i) = f(simplex.col(i));
        }
      }
    }
    log.emplace_back(iterations, values.minCoeff());
  }
  order(simplex, values);
  return {simplex.col(0), values(0), false};
}

}  // namespace

FitResult fit(const CalibrationTargets& targets, const CalibrationBase& base, int budget,
              const FitOptions& options) {
  if (budget < 100) throw DomainError(fmt::format("fit: budget {} must be >= 100", budget));
  if (options.grid_points < 2) throw DomainError("fit: need at least 2 grid points per dimension");
  targets.validate();
  base.params.validate();

  BudgetedObjective f(targets, base, budget);
  FitResult result;

  // Coarse grid seeding over the unit cube, bounds included.
  const int g = options.grid_points;
  int grid_size = 1;
  for (int i = 0; i < kParameterCount; ++i) grid_size *= g;
  const int n_grid = std::min(grid_size, budget);
  auto grid_point = [&](int index) {
    ParameterVector u;
    for (int d = kParameterCount - 1; d >= 0; --d) {
      u(d) = static_cast<double>(index % g) / static_cast<double>(g - 1);
      index /= g;
    }
    return u;
  };
  std::vector<double> grid_loss(static_cast<std::size_t>(n_grid));
  const int workers = std::clamp(options.jobs, 1, n_grid);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n_grid; i = next++) grid_loss[static_cast<std::size_t>(i)] = f.raw(grid_point(i));
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  f.charge(n_grid);
  std::vector<int> ranked(static_cast<std::size_t>(n_grid));
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    return grid_loss[static_cast<std::size_t>(a)] < grid_loss[static_cast<std::size_t>(b)];
  });
  ParameterVector best = grid_point(ranked.front());
  double best_value = grid_loss[static_cast<std::size_t>(ranked.front())];
  result.log.emplace_back(0, best_value);

  // Simplex refinement from each seed, restarted from its incumbent until a restart stops
  // improving. Several seeds guard against a basin pinned to the bounds.
  bool converged = false;
  const int starts = std::clamp(options.starts, 1, n_grid);
  for (int k = 0; k < starts && !f.exhausted(); ++k) {
    ParameterVector local = grid_point(ranked[static_cast<std::size_t>(k)]);
    double local_value = grid_loss[static_cast<std::size_t>(ranked[static_cast<std::size_t>(k)])];
    bool local_converged = false;
    double step = 0.5 / static_cast<double>(g - 1);
    while (!f.exhausted()) {
      const SimplexOutcome run =
          nelder_mead(f, local, local_value, step, options.tolerance, result.iterations, result.log);
      const double previous = local_value;
      if (run.value < local_value) {
        local = run.best;
        local_value = run.value;
      }
      if (!run.converged) break;
      if (previous - local_value <= options.tolerance * std::abs(local_value) + 1e-14) {
        local_converged = true;
        break;
      }
      step = std::max(0.5 * step, 1e-3);
    }
    if (local_value < best_value || k == 0) {
      best = local;
      best_value = local_value;
      converged = local_converged;
    }
  }

  // Later seeds restart above the incumbent; the log reports the best loss so far.
  for (std::size_t i = 1; i < result.log.size(); ++i) {
    result.log[i].second = std::min(result.log[i].second, result.log[i - 1].second);
  }

  const ParameterVector x = base.bounds.clamp(base.bounds.from_unit(unit_clamp(best)));
  const LossEvaluation final_eval = evaluate_loss(x, targets, base);
  result.params = x;
  result.loss = final_eval.value;
  result.residuals = final_eval.residuals;
  result.evaluations = f.used();
  result.converged = converged;
  return result;
}

}  // namespace pulsejet
