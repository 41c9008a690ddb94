#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pulsejet/analysis.hpp"
#include "pulsejet/config.hpp"
#include "pulsejet/dynamics.hpp"
#include "pulsejet/errors.hpp"

using namespace pulsejet;
using doctest::Approx;

namespace {

BodyState at(double s, double v, const RigidBodyParams& p) {
  BodyState st;
  st.s = s;
  st.v = v;
  st.V = cavity_volume(s, p.geometry);
  return st;
}

double glide_work_closure(const Trajectory& tr, const RigidBodyParams& p) {
  std::size_t begin = 0, end = 0;
  for (std::size_t i = 0; i + 1 < tr.markers.size(); ++i) {
    if (tr.markers[i].phase == Phase::Glide) {
      begin = tr.markers[i].index - 1;
      end = tr.markers[i + 1].index - 1;
      break;
    }
  }
  REQUIRE(end > begin);
  const double m = effective_mass(tr.states[begin], p);
  const double dke = 0.5 * m * (tr.states[begin].v * tr.states[begin].v - tr.states[end].v * tr.states[end].v);
  // Simpson's rule over the drag power, padded with a trapezoid if the step count is odd.
  auto power = [&](std::size_t i) { return -glide_force(tr.states[i], p) * tr.states[i].v; };
  double work = 0.0;
  std::size_t i = begin;
  for (; i + 2 <= end; i += 2) work += tr.dt / 3.0 * (power(i) + 4.0 * power(i + 1) + power(i + 2));
  if (i < end) work += 0.5 * tr.dt * (power(i) + power(i + 1));
  return std::abs(work / dke - 1.0);
}

}  // namespace

TEST_CASE("effective mass hand values") {
  RigidBodyParams p;
  CHECK(effective_mass(at(0.0, 0.0, p), p) == Approx(1.05));
  CHECK(effective_mass(at(0.75, 0.0, p), p) == Approx(0.675));
  p.hydro.c_added = 0.5;
  CHECK(effective_mass(at(0.75, 0.0, p), p) == Approx(0.925));
}

TEST_CASE("expulsion thrust hand value") {
  RigidBodyParams p;
  const double q = 375e-6 / 0.55;
  CHECK(expulsion_force(at(0.3, 0.0, p), q, p) == Approx(4.648).epsilon(1e-3));
  CHECK(expulsion_force(at(0.3, 0.0, p), 0.0, p) == 0.0);
  RigidBodyParams half = p;
  half.geometry.A_nozzle = 0.5e-4;
  CHECK(jet_thrust(1000.0, q, half.geometry.A_nozzle) == Approx(2.0 * jet_thrust(1000.0, q, 1e-4)));
}

TEST_CASE("glide force") {
  RigidBodyParams p;
  CHECK(glide_force(at(0.0, 0.0, p), p) == 0.0);
  CHECK(glide_force(at(0.0, 0.39, p), p) == Approx(-0.3628).epsilon(1e-3));
  CHECK(std::abs(glide_force(at(0.75, 0.3, p), p)) < std::abs(glide_force(at(0.0, 0.3, p), p)));
}

TEST_CASE("refill force terms") {
  RigidBodyParams p;
  const double q = 375e-6 / 0.55;
  const RefillForce f = refill_force_terms(at(0.4, 0.3, p), q, p.geometry.inlet_area(true), p);
  CHECK(f.momentum_transfer == Approx(0.2045).epsilon(1e-3));
  CHECK(f.suction == 0.0);
  CHECK(refill_force(at(0.4, 0.0, p), q, p.geometry.inlet_area(true), p) == 0.0);
  const RefillForce half = refill_force_terms(at(0.4, 0.3, p), q / 2.0, p.geometry.inlet_area(false), p);
  CHECK(half.momentum_transfer == Approx(0.5 * f.momentum_transfer));
  CHECK_THROWS_AS(refill_force(at(0.4, 0.3, p), q, 0.0, p), ConfigError);
}

TEST_CASE("no contraction, no motion") {
  RigidBodyParams p;
  CycleSchedule s = CycleSchedule::with_valves(0.2);
  s.evr_target = 0.0;
  const Trajectory tr = simulate(s, p, 2, 1e-3);
  for (const auto& st : tr.states) CHECK(st.v == 0.0);
}

TEST_CASE("trajectory bookkeeping") {
  RigidBodyParams p;
  const CycleSchedule s = CycleSchedule::with_valves(0.37);
  const Trajectory tr = simulate(s, p, 2, 1e-3);
  CHECK(tr.size() == static_cast<std::size_t>(std::llround(2 * s.period() / 1e-3)) + 1);
  CHECK(tr.front().t == 0.0);
  CHECK(tr.front().x == 0.0);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    CHECK(tr.states[i].t > tr.states[i - 1].t);
    CHECK(tr.states[i].V == Approx(cavity_volume(tr.states[i].s, p.geometry)).epsilon(1e-14));
    // Continuity: no jump larger than a step's worth of motion.
    CHECK(std::abs(tr.states[i].v - tr.states[i - 1].v) < 0.05);
  }
  CHECK(tr.back().s == Approx(0.0).epsilon(1e-12));
  CHECK(effective_mass(tr.back(), p) == Approx(effective_mass(tr.front(), p)).epsilon(1e-14));
}

TEST_CASE("refill decelerates monotonically without suction") {
  RigidBodyParams p;
  p.hydro.c_suction = 0.0;
  double previous_drop = 0.0;
  for (double glide : {2.0, 1.0, 0.5, 0.0}) {
    const Trajectory tr = simulate(CycleSchedule::with_valves(glide), p, 1, 1e-3);
    const std::size_t onset = tr.markers.back().index - 1;
    REQUIRE(tr.markers.back().phase == Phase::Refill);
    for (std::size_t i = onset + 1; i < tr.size(); ++i) CHECK(tr.states[i].v <= tr.states[i - 1].v);
    const double drop = tr.states[onset].v - tr.back().v;
    CHECK(drop > previous_drop);
    previous_drop = drop;
  }
}

TEST_CASE("halving dt barely moves the final displacement") {
  RigidBodyParams p;
  for (double glide : {0.0, 1.10}) {
    const CycleSchedule s = CycleSchedule::with_valves(glide);
    const double coarse = simulate(s, p, 3, 1e-3).back().x;
    const double fine = simulate(s, p, 3, 5e-4).back().x;
    CHECK(std::abs(fine - coarse) / std::abs(fine) < 1e-4);
  }
}

TEST_CASE("glide work-energy bookkeeping closes") {
  RigidBodyParams p;
  const Trajectory tr = simulate(CycleSchedule::with_valves(1.10), p, 1, 1e-3);
  CHECK(glide_work_closure(tr, p) < 1e-3);
}

TEST_CASE("simulation is bit-identical on rerun") {
  RigidBodyParams p;
  p.hydro.c_suction = 1.3;
  const CycleSchedule s = CycleSchedule::valve_free(0.37);
  std::ostringstream a, b;
  write_trajectory_csv(a, simulate(s, p, 3, 1e-3));
  write_trajectory_csv(b, simulate(s, p, 3, 1e-3));
  CHECK(a.str() == b.str());
}

TEST_CASE("phase durations must sit on the step grid") {
  RigidBodyParams p;
  CHECK_THROWS_AS(simulate(CycleSchedule::with_valves(0.3705), p, 1, 1e-3), ConfigError);
  CHECK_THROWS_AS(simulate(CycleSchedule::with_valves(0.0), p, 0, 1e-3), ConfigError);
}

TEST_CASE("stop distance ends the run after the crossing cycle") {
  RigidBodyParams p;
  SimulationOptions opt;
  opt.stop_distance = 1.0;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.0), p, 50, 1e-3, opt);
  CHECK(tr.back().x >= 1.0);
  CHECK(tr.cycles < 50);
}

TEST_CASE("calibrated defaults reproduce the 75% peak speed") {
  const RunConfig c = load_config(PULSEJET_DEFAULT_CONFIG);
  CycleSchedule s = CycleSchedule::with_valves(0.0);
  const Trajectory tr = simulate(s, c.params(), 1, 1e-3);
  CHECK(tr.peak_speed() == Approx(0.39).epsilon(0.15));
}

TEST_CASE("smoothstep profile conserves stroke and mass") {
  RigidBodyParams p;
  SimulationOptions opt;
  opt.profile = ActuationProfile::Smoothstep;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.2), p, 1, 1e-3, opt);
  double smax = 0.0;
  for (const auto& st : tr.states) smax = std::max(smax, st.s);
  CHECK(smax == Approx(0.75));
  CHECK(tr.back().s == Approx(0.0).epsilon(1e-12));
}
