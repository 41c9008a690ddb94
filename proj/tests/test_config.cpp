#include <doctest.h>

#include <sstream>

#include "pulsejet/config.hpp"
#include "pulsejet/errors.hpp"

using namespace pulsejet;
using doctest::Approx;

TEST_CASE("empty config carries the documented defaults") {
  std::istringstream in("");
  const RunConfig c = parse_config(in);
  CHECK(c.geometry.V_tot == 0.5e-3);
  CHECK(c.schedule.t_refill == 0.55);
  CHECK(c.energy.E_expulsion == 2.2);
  CHECK(c.dt == 1e-3);
}

TEST_CASE("lab units are converted to SI") {
  std::istringstream in(
      "[geometry]\nV_tot_mL = 250  # cavity\nA_nozzle_cm2 = 0.5\nbody_length_cm = 10\n"
      "[hydro]\ncda_s = 0, 0.75\ncda_cm2 = 40, 10\n");
  const RunConfig c = parse_config(in);
  CHECK(c.geometry.V_tot == Approx(250e-6));
  CHECK(c.geometry.A_nozzle == Approx(0.5e-4));
  CHECK(c.geometry.body_length == Approx(0.1));
  CHECK(cda_at(0.375, c.params().hydro) == Approx(25e-4));
}

TEST_CASE("valve-free switches the refill duration unless it is explicit") {
  std::istringstream a("[schedule]\nvalves = false\n");
  CHECK(parse_config(a).schedule.t_refill == 1.10);
  std::istringstream b("[schedule]\nvalves = false\nt_refill = 0.8\n");
  CHECK(parse_config(b).schedule.t_refill == 0.8);
}

TEST_CASE("unknown keys and sections are rejected with the line") {
  std::istringstream a("[geometry]\n\nV_total = 3\n");
  try {
    parse_config(a);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream b("[nowhere]\n");
  CHECK_THROWS_AS(parse_config(b), ConfigError);
  std::istringstream c("dt = 1e-3\n");
  CHECK_THROWS_AS(parse_config(c), ConfigError);
}

TEST_CASE("loaded values are re-validated") {
  std::istringstream a("[geometry]\nA_contracted_cm2 = 60\n");
  CHECK_THROWS_AS(parse_config(a), ConfigError);
  std::istringstream b("[integrator]\ndt = -1\n");
  CHECK_THROWS_AS(parse_config(b), ConfigError);
  std::istringstream c("[hydro]\nrho = abc\n");
  CHECK_THROWS_AS(parse_config(c), ConfigError);
  std::istringstream d("[targets]\nbudget = 50\n");
  CHECK_THROWS_AS(parse_config(d), ConfigError);
}

TEST_CASE("written config reproduces itself") {
  std::istringstream in(
      "[geometry]\nV_tot_mL = 123.4\n[schedule]\nt_glide = 0.37\nvalves = no\nprofile = smoothstep\n"
      "[energy]\nm_ref_kg = 0.8\n[integrator]\ncourse_m = 2\n[targets]\nrefill = 0:0.106, 50:0.2:0.063\n"
      "[sweep]\nvar = glide\ngrid = 0, 1.5\n[analysis]\ndistance_m = 0.5\n");
  const RunConfig c = parse_config(in);
  std::ostringstream first;
  write_config(first, c);
  std::istringstream again(first.str());
  const RunConfig d = parse_config(again);
  std::ostringstream second;
  write_config(second, d);
  CHECK(first.str() == second.str());
  CHECK(d.geometry.V_tot == Approx(123.4e-6));
  CHECK(d.schedule.valves == false);
  CHECK(d.profile == ActuationProfile::Smoothstep);
  CHECK(*d.energy.m_ref == 0.8);
  CHECK(*d.course == 2.0);
  CHECK(d.targets.refill.size() == 2);
  CHECK(*d.targets.refill[1].onset == 0.2);
  CHECK(d.sweep_variable == SweepVariable::GlideDuration);
  CHECK(*d.distance == 0.5);
}

TEST_CASE("fitted vector lands in the right fields") {
  RunConfig c;
  c.apply_fit(ParameterVector(0.2e-3, 0.9e-4, 0.3, 2.0));
  const RigidBodyParams p = c.params();
  CHECK(p.geometry.V_tot == 0.2e-3);
  CHECK(p.geometry.A_nozzle == 0.9e-4);
  CHECK(p.hydro.c_suction == 0.3);
  CHECK(cda_at(0.0, p.hydro) == Approx(2.0 * 47.7e-4));
}

TEST_CASE("shipped default config loads") {
  const RunConfig c = load_config(PULSEJET_DEFAULT_CONFIG);
  CHECK(c.geometry.V_tot > 0.0);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), IoError);
}
