#include <doctest.h>

#include <random>

#include "pulsejet/cycle.hpp"
#include "pulsejet/errors.hpp"
#include "pulsejet/geometry.hpp"

using namespace pulsejet;
using doctest::Approx;

TEST_CASE("cavity volume and expelled volume at the stroke ends") {
  MantleGeometry g;
  CHECK(cavity_volume(0.0, g) == 0.5e-3);
  CHECK(cavity_volume(0.75, g) == Approx(0.125e-3).epsilon(1e-14));
  CHECK(expelled_volume(0.0, g) == 0.0);
  CHECK(expelled_volume(0.75, g) == Approx(375e-6).epsilon(1e-14));
  CHECK_THROWS_AS(cavity_volume(-0.01, g), DomainError);
  CHECK_THROWS_AS(expelled_volume(0.76, g), DomainError);
}

TEST_CASE("frontal area endpoints and midpoint") {
  MantleGeometry g;
  CHECK(frontal_area(0.0, g) == Approx(47.7e-4).epsilon(1e-14));
  CHECK(frontal_area(0.75, g) == Approx(11.6e-4).epsilon(1e-14));
  CHECK(frontal_area(0.375, g) == Approx(29.65e-4).epsilon(1e-14));
  CHECK_THROWS_AS(frontal_area(0.8, g), DomainError);
}

TEST_CASE("area reduction and expansion ratio of the default mantle") {
  MantleGeometry g;
  CHECK(100.0 * g.area_reduction() == Approx(75.7).epsilon(0.1 / 75.7));
  CHECK(g.expansion_ratio() == Approx(4.11).epsilon(0.02 / 4.11));
}

TEST_CASE("volume closure and evr round trip") {
  MantleGeometry g;
  g.V_tot = 0.37e-3;
  for (int i = 0; i <= 75; ++i) {
    const double s = 0.01 * i;
    CHECK(std::abs(cavity_volume(s, g) + expelled_volume(s, g) - g.V_tot) <= 1e-18);
    CHECK(evr(expelled_volume(s, g), g.V_tot) == Approx(100.0 * s).epsilon(1e-13));
  }
}

TEST_CASE("frontal area is non-increasing in s for random geometries") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> area(1e-4, 1e-2), stroke(0.1, 0.95), u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    MantleGeometry g;
    g.A_expanded = area(rng);
    g.A_contracted = g.A_expanded * (0.05 + 0.9 * u(rng));
    g.s_max = stroke(rng);
    double a = u(rng) * g.s_max, b = u(rng) * g.s_max;
    if (a > b) std::swap(a, b);
    CHECK(frontal_area(a, g) >= frontal_area(b, g));
  }
}

TEST_CASE("area table overrides the linear law") {
  MantleGeometry g;
  g.area_table = PiecewiseLinear({0.0, 0.5, 0.75}, {40e-4, 20e-4, 10e-4});
  CHECK(frontal_area(0.25, g) == Approx(30e-4));
  CHECK(frontal_area(0.75, g) == Approx(10e-4));
}

TEST_CASE("invalid geometry is rejected") {
  MantleGeometry g;
  g.A_contracted = 50e-4;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = MantleGeometry{};
  g.A_nozzle = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = MantleGeometry{};
  g.s_max = 1.2;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("interpolation clamps and hits knots") {
  PiecewiseLinear f({0.0, 1.0, 3.0}, {2.0, 4.0, 0.0});
  CHECK(f(-1.0) == 2.0);
  CHECK(f(5.0) == 0.0);
  CHECK(f(1.0) == 4.0);
  CHECK(f(2.0) == Approx(2.0));
  CHECK(f(0.5) == Approx(3.0));
  CHECK_THROWS(PiecewiseLinear({0.0, 0.0}, {1.0, 2.0}));
}
