#include "pulsejet/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Expulsion: return "expulsion";
    case Phase::Glide: return "glide";
    case Phase::Refill: return "refill";
    case Phase::Hold: return "hold";
  }
  return "unknown";
}

void RigidBodyParams::validate() const {
  if (!(m_struct > 0.0)) throw ConfigError(fmt::format("body: m_struct = {} must be > 0", m_struct));
  geometry.validate();
  hydro.validate();
}

Eigen::VectorXd Trajectory::times() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) out(static_cast<Eigen::Index>(i)) = states[i].t;
  return out;
}

Eigen::VectorXd Trajectory::positions() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) out(static_cast<Eigen::Index>(i)) = states[i].x;
  return out;
}

Eigen::VectorXd Trajectory::velocities() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) out(static_cast<Eigen::Index>(i)) = states[i].v;
  return out;
}

double Trajectory::peak_speed() const {
  double peak = 0.0;
  for (const auto& s : states) peak = std::max(peak, s.v);
  return peak;
}

std::optional<double> Trajectory::refill_onset_speed() const {
  for (const auto& m : markers) {
    if (m.phase == Phase::Refill) return states[m.index - 1].v;
  }
  return std::nullopt;
}

double effective_mass(const BodyState& state, const RigidBodyParams& p) {
  const double rho = p.hydro.rho;
  return p.m_struct + rho * state.V + p.hydro.c_added * rho * p.geometry.V_tot;
}

double expulsion_force(const BodyState& state, double q, const RigidBodyParams& p) {
  if (!(p.geometry.A_nozzle > 0.0)) {
    throw ConfigError(fmt::format("expulsion_force: A_nozzle = {} must be > 0", p.geometry.A_nozzle));
  }
  const double rho = p.hydro.rho;
  return jet_thrust(rho, q, p.geometry.A_nozzle) -
         quadratic_drag(rho, cda_at(state.s, p.hydro), state.v);
}

double glide_force(const BodyState& state, const RigidBodyParams& p) {
  return -quadratic_drag(p.hydro.rho, cda_at(state.s, p.hydro), state.v);
}

RefillForce refill_force_terms(const BodyState& state, double q_in, double a_in,
                               const RigidBodyParams& p) {
  if (!(a_in > 0.0)) throw ConfigError(fmt::format("refill_force: inlet area {} must be > 0", a_in));
  const double rho = p.hydro.rho;
  const double v = state.v;
  RefillForce f;
  f.momentum_transfer = rho * q_in * v;
  f.suction = p.hydro.c_suction * rho * q_in * q_in / a_in * v /
              std::sqrt(v * v + kSuctionSpeedScale * kSuctionSpeedScale);
  f.drag = quadratic_drag(rho, cda_at(state.s, p.hydro), v);
  return f;
}

double refill_force(const BodyState& state, double q_in, double a_in, const RigidBodyParams& p) {
  return refill_force_terms(state, q_in, a_in, p).net();
}

namespace {

long steps_for(double duration, double dt, const char* name) {
  const long n = std::lround(duration / dt);
  if (std::abs(static_cast<double>(n) * dt - duration) > 1e-9) {
    throw ConfigError(fmt::format("{} = {} s is not a multiple of dt = {} s", name, duration, dt));
  }
  return n;
}

/// Prescribed contraction over one phase, parameterized by u in [0, 1].
struct Stroke {
  double s0;
  double s1;
  ActuationProfile profile;

  double at(double u) const {
    if (profile == ActuationProfile::Smoothstep) u = u * u * (3.0 - 2.0 * u);
    return s0 + (s1 - s0) * u;
  }
  /// ds/du
  double rate(double u) const {
    if (profile == ActuationProfile::Smoothstep) return (s1 - s0) * 6.0 * u * (1.0 - u);
    return s1 - s0;
  }
};

using Vec2 = Eigen::Vector2d;

class Integrator {
 public:
  Integrator(const RigidBodyParams& p, double dt, Trajectory& out) : p_(p), dt_(dt), out_(out) {}

  /// Integrates one phase of `steps` steps. `valves` selects the refill inlet.
  void run_phase(Phase phase, const Stroke& stroke, long steps, bool valves, int cycle) {
    if (steps == 0) return;
    out_.markers.push_back({out_.states.size(), phase, cycle});
    const double duration = static_cast<double>(steps) * dt_;
    const double a_in = p_.geometry.inlet_area(valves);
    const double v_tot = p_.geometry.V_tot;

    auto rhs = [&](double u, const Vec2& y) -> Vec2 {
      BodyState st;
      st.s = stroke.at(u);
      st.V = linear_cavity_volume(st.s, v_tot);
      st.v = y(1);
      const double ds_dt = stroke.rate(u) / duration;
      double force = 0.0;
      switch (phase) {
        case Phase::Expulsion: force = expulsion_force(st, v_tot * ds_dt, p_); break;
        case Phase::Glide: force = glide_force(st, p_); break;
        case Phase::Refill: force = refill_force(st, -v_tot * ds_dt, a_in, p_); break;
        case Phase::Hold: force = fall_force_ - quadratic_drag(p_.hydro.rho, cda_at(st.s, p_.hydro), st.v); break;
      }
      return Vec2(y(1), force / effective_mass(st, p_));
    };

    const double n = static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      const double u0 = static_cast<double>(k) / n;
      const double uh = (static_cast<double>(k) + 0.5) / n;
      const double u1 = static_cast<double>(k + 1) / n;
      const Vec2 k1 = rhs(u0, y_);
      const Vec2 k2 = rhs(uh, y_ + 0.5 * dt_ * k1);
      const Vec2 k3 = rhs(uh, y_ + 0.5 * dt_ * k2);
      const Vec2 k4 = rhs(u1, y_ + dt_ * k3);
      y_ += dt_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ++step_;
      const double t = static_cast<double>(step_) * dt_;
      if (!y_.allFinite()) {
        throw IntegrationFault(fmt::format("non-finite state at t = {} s", t), t);
      }
      const double s = stroke.at(u1);
      out_.states.push_back({t, y_(0), y_(1), s, linear_cavity_volume(s, v_tot), phase});
    }
  }

  void start(double x0, double v0, double s0, Phase phase) {
    y_ = Vec2(x0, v0);
    out_.states.push_back({0.0, x0, v0, s0, linear_cavity_volume(s0, p_.geometry.V_tot), phase});
  }

  double position() const { return y_(0); }
  void set_fall_force(double f) { fall_force_ = f; }

 private:
  const RigidBodyParams& p_;
  double dt_;
  Trajectory& out_;
  Vec2 y_ = Vec2::Zero();
  long step_ = 0;
  double fall_force_ = 0.0;
};

}  // namespace

Trajectory simulate(const CycleSchedule& schedule, const RigidBodyParams& p, int n_cycles,
                    double dt, const SimulationOptions& options) {
  p.validate();
  schedule.validate(p.geometry.s_max);
  if (!(dt > 0.0)) throw ConfigError(fmt::format("simulate: dt = {} must be > 0", dt));
  if (n_cycles < 1) throw ConfigError(fmt::format("simulate: n_cycles = {} must be >= 1", n_cycles));
  const long n_exp = steps_for(schedule.t_expulsion, dt, "t_expulsion");
  const long n_glide = steps_for(schedule.t_glide, dt, "t_glide");
  const long n_refill = steps_for(schedule.t_refill, dt, "t_refill");
  if (n_exp < 1 || n_refill < 1) throw ConfigError("simulate: phase shorter than one step");

  Trajectory out;
  out.dt = dt;
  out.states.reserve(static_cast<std::size_t>((n_exp + n_glide + n_refill) * n_cycles + 1));
  Integrator integrator(p, dt, out);
  integrator.start(0.0, options.v0, 0.0, Phase::Expulsion);

  const double evr = schedule.evr_target;
  const Stroke contract{0.0, evr, options.profile};
  const Stroke hold{evr, evr, options.profile};
  const Stroke recover{evr, 0.0, options.profile};
  for (int c = 0; c < n_cycles; ++c) {
    integrator.run_phase(Phase::Expulsion, contract, n_exp, schedule.valves, c);
    integrator.run_phase(Phase::Glide, hold, n_glide, schedule.valves, c);
    integrator.run_phase(Phase::Refill, recover, n_refill, schedule.valves, c);
    out.cycles = c + 1;
    if (options.stop_distance && integrator.position() >= *options.stop_distance) break;
  }
  return out;
}

Trajectory simulate_fall(const RigidBodyParams& p, double f_net, double s, double dt,
                         double duration) {
  p.validate();
  if (!(f_net >= 0.0)) throw ConfigError(fmt::format("simulate_fall: F_net = {} must be >= 0", f_net));
  if (!(dt > 0.0)) throw ConfigError(fmt::format("simulate_fall: dt = {} must be > 0", dt));
  cavity_volume(s, p.geometry);
  const long n = steps_for(duration, dt, "fall duration");

  Trajectory out;
  out.dt = dt;
  out.states.reserve(static_cast<std::size_t>(n + 1));
  Integrator integrator(p, dt, out);
  integrator.set_fall_force(f_net);
  integrator.start(0.0, 0.0, s, Phase::Hold);
  integrator.run_phase(Phase::Hold, Stroke{s, s, ActuationProfile::ConstantRate}, n, true, 0);
  return out;
}

}  // namespace pulsejet
