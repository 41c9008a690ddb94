#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pulsejet/analysis.hpp"
#include "pulsejet/errors.hpp"

using namespace pulsejet;
using doctest::Approx;

namespace {

Trace ramp(double v, int n = 31, double dt = 0.1) {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, dt * (n - 1));
  return make_trace(t, v * t);
}

}  // namespace

TEST_CASE("ingest a small file with header and comments") {
  std::istringstream in("# tracked\nt,x,y\n0,0,0.1\n0.5,0.1,0.1\n1.0,0.25,0.2\n");
  const Trace tr = ingest(in);
  CHECK(tr.size() == 3);
  CHECK(tr.x(2) == 0.25);
  REQUIRE(tr.y);
  CHECK((*tr.y)(2) == 0.2);
}

TEST_CASE("ingest without a header") {
  std::istringstream in("0,0\n0.1,0.01\n0.2,0.03\n");
  CHECK(ingest(in).size() == 3);
}

TEST_CASE("duplicated timestamp names the line") {
  std::istringstream in("t,x\n0,0\n0.1,0.01\n0.1,0.02\n0.2,0.03\n");
  try {
    ingest(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("malformed row and short traces") {
  std::istringstream bad("t,x\n0,0\n0.1,abc\n0.2,0.1\n");
  CHECK_THROWS_AS(ingest(bad), ParseError);
  std::istringstream shortin("t,x\n0,0\n0.1,0.1\n");
  CHECK_THROWS_AS(ingest(shortin), DomainError);
  CHECK_THROWS_AS(ingest(std::filesystem::path("/nonexistent/trace.csv")), IoError);
}

TEST_CASE("velocity of linear and quadratic traces") {
  const Eigen::VectorXd v = velocity(ramp(0.2));
  CHECK((v.array() - 0.2).abs().maxCoeff() < 1e-12);

  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(41, 0.0, 4.0);
  const double a = 0.3;
  const Trace q = make_trace(t, 0.5 * a * t.array().square().matrix());
  const Eigen::VectorXd vq = velocity(q, 1);
  for (Eigen::Index i = 1; i + 1 < t.size(); ++i) CHECK(vq(i) == Approx(a * t(i)).epsilon(1e-12));
  CHECK_THROWS_AS(velocity(q, 4), DomainError);
  CHECK_THROWS_AS(velocity(q, 43), DomainError);
}

TEST_CASE("velocity is odd under sign reversal") {
  std::mt19937 rng(2);
  std::normal_distribution<double> noise(0.0, 1e-3);
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(90, 0.0, 3.0);
  Eigen::VectorXd x(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) x(i) = 0.1 * std::sin(2.0 * t(i)) + noise(rng);
  const Eigen::VectorXd v = velocity(make_trace(t, x), 5);
  const Eigen::VectorXd w = velocity(make_trace(t, -x), 5);
  CHECK((v + w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("metrics of constant-velocity and 0.5 m in 2.9 s traces") {
  const MetricsReport m = metrics(ramp(0.2));
  CHECK(m.avg_speed == Approx(0.2).epsilon(1e-14));
  CHECK(m.peak_speed == Approx(m.avg_speed).epsilon(1e-12));

  Eigen::VectorXd t(3), x(3);
  t << 0.0, 1.45, 2.9;
  x << 0.0, 0.25, 0.5;
  CHECK(metrics(make_trace(t, x)).avg_speed == Approx(0.172).epsilon(0.5e-3 / 0.172));
  t << 0.0, 3.57, 7.14;
  x << 0.0, 1.0, 2.0;
  CHECK(metrics(make_trace(t, x)).avg_speed == Approx(0.28).epsilon(0.005 / 0.28));
}

TEST_CASE("time to distance interpolates and rejects unreached distances") {
  MetricsOptions opt;
  opt.query_distance = 0.25;
  CHECK(*metrics(ramp(0.2), opt).time_to_distance == Approx(1.25));
  opt.query_distance = 5.0;
  CHECK_THROWS_AS(metrics(ramp(0.2), opt), RangeError);
}

TEST_CASE("avg speed is stable under resampling of the same motion") {
  RigidBodyParams p;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.37), p, 2, 1e-3);
  const Trace full = to_trace(tr);
  const double reference = metrics(full).avg_speed;
  for (int stride : {10, 33, 40}) {
    std::vector<double> ts, xs;
    for (Eigen::Index i = 0; i < full.size(); i += stride) ts.push_back(full.t(i)), xs.push_back(full.x(i));
    const Trace sub = make_trace(Eigen::Map<Eigen::VectorXd>(ts.data(), ts.size()),
                                 Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size()));
    CHECK(metrics(sub).avg_speed == Approx(reference).epsilon(0.005));
  }
}

TEST_CASE("phase segmentation follows the commanded schedule") {
  RigidBodyParams p;
  const CycleSchedule s = CycleSchedule::with_valves(0.37);
  const Trajectory tr = simulate(s, p, 1, 1e-3);
  MetricsOptions opt;
  opt.schedule = s;
  opt.window = 1;
  const MetricsReport m = metrics(to_trace(tr), opt);
  REQUIRE(m.phase_deltas.size() == 3);
  CHECK(m.phase_deltas[0].dv > 0.0);
  CHECK(m.phase_deltas[1].dv < 0.0);
  REQUIRE(m.refill_onset_speed);
  CHECK(*m.refill_onset_speed == Approx(*tr.refill_onset_speed()).epsilon(1e-3));
}

TEST_CASE("peak of the differentiated simulation matches the recorded peak") {
  RigidBodyParams p;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.0), p, 1, 1e-3);
  CHECK(metrics(to_trace(tr)).peak_speed == Approx(tr.peak_speed()).epsilon(0.01));
}

TEST_CASE("emit then ingest is the identity on (t, x)") {
  RigidBodyParams p;
  const Trace tr = to_trace(simulate(CycleSchedule::with_valves(0.2), p, 1, 1e-3));
  std::stringstream buffer;
  emit(buffer, tr, 6);
  const Trace back = ingest(buffer);
  REQUIRE(back.size() == tr.size());
  for (Eigen::Index i = 0; i < tr.size(); ++i) {
    CHECK(back.t(i) == Approx(tr.t(i)).epsilon(1e-5));
    CHECK(back.x(i) == Approx(tr.x(i)).epsilon(1e-5));
  }
}

TEST_CASE("trajectory CSV round-trips through ingest") {
  RigidBodyParams p;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.2), p, 1, 1e-3);
  std::stringstream buffer;
  write_trajectory_csv(buffer, tr);
  const Trace back = ingest(buffer);
  REQUIRE(back.size() == static_cast<Eigen::Index>(tr.size()));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(back.t(i) == tr.states[i].t);
    CHECK(back.x(i) == tr.states[i].x);
  }
}

TEST_CASE("compare against itself and a shifted ramp") {
  const Trace a = ramp(0.2);
  const ComparisonReport self = compare(a, a);
  CHECK(self.rmse_x == 0.0);
  CHECK(self.rmse_v == 0.0);

  // Same motion delayed by one sample: x error is v * dt everywhere on the overlap.
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(31, 0.0, 3.0);
  const Trace shifted = make_trace(t, (0.2 * (t.array() - 0.1)).matrix());
  const ComparisonReport r = compare(a, shifted);
  CHECK(r.rmse_x == Approx(0.02).epsilon(1e-10));
  CHECK(r.max_error_x == Approx(0.02).epsilon(1e-10));
  CHECK(r.rmse_v == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("disjoint time ranges cannot be compared") {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(10, 10.0, 11.0);
  CHECK_THROWS_AS(compare(ramp(0.2), make_trace(t, t)), DomainError);
}

TEST_CASE("simulation against a sparse tracked copy of itself") {
  RigidBodyParams p;
  const Trajectory tr = simulate(CycleSchedule::with_valves(0.2), p, 1, 1e-3);
  std::vector<double> ts, xs;
  for (std::size_t i = 0; i < tr.size(); i += 33) ts.push_back(tr.states[i].t), xs.push_back(tr.states[i].x);
  const Trace exp = make_trace(Eigen::Map<Eigen::VectorXd>(ts.data(), ts.size()),
                               Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size()));
  const ComparisonReport r = compare(tr, exp, 1);
  CHECK(r.rmse_x < 1e-12);
  CHECK(std::abs(r.rel_distance) < 1e-12);
}
