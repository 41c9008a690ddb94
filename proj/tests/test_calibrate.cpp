#include <doctest.h>

#include <algorithm>
#include <random>

#include "pulsejet/calibrate.hpp"
#include "pulsejet/errors.hpp"

using namespace pulsejet;
using doctest::Approx;

namespace {

const ParameterVector kTruth(0.3e-3, 0.6e-4, 0.8, 1.5);

/// Targets holding the simulator's own observables at `x`.
CalibrationTargets synthetic(const ParameterVector& x, const CalibrationBase& base) {
  CalibrationTargets t = CalibrationTargets::builtin();
  t.refill = {{0.0, 0.1, 0.1}, {50.0, 0.1, 0.1}};
  const LossEvaluation e = evaluate_loss(x, t, base);
  std::size_t k = 0;
  for (auto& p : t.peak_speeds) p.speed = e.residuals[k++].simulated;
  for (auto& p : t.transit) p.time = e.residuals[k++].simulated;
  for (auto& r : t.refill) {
    r.onset = e.residuals[k++].simulated;
    r.end = e.residuals[k++].simulated;
  }
  return t;
}

}  // namespace

TEST_CASE("self-generated targets give zero loss and any perturbation raises it") {
  const CalibrationBase base;
  const CalibrationTargets t = synthetic(kTruth, base);
  CHECK(loss(kTruth, t, base) == 0.0);
  for (int i = 0; i < kParameterCount; ++i) {
    ParameterVector x = kTruth;
    x(i) *= 1.02;
    CHECK(loss(x, t, base) > 0.0);
  }
}

TEST_CASE("loss is invariant under target permutation") {
  const CalibrationBase base;
  CalibrationTargets t = CalibrationTargets::builtin();
  t.refill = {{0.0, std::nullopt, 0.106}, {50.0, std::nullopt, 0.063}};
  const ParameterVector x(0.4e-3, 1e-4, 1.0, 1.2);
  const double reference = loss(x, t, base);
  std::mt19937 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(t.peak_speeds.begin(), t.peak_speeds.end(), rng);
    std::shuffle(t.transit.begin(), t.transit.end(), rng);
    std::shuffle(t.refill.begin(), t.refill.end(), rng);
    CHECK(loss(x, t, base) == reference);
  }
}

TEST_CASE("loss is the weighted sum of squared relative residuals") {
  const CalibrationBase base;
  CalibrationTargets t = CalibrationTargets::builtin();
  t.transit_weight = 2.5;
  const LossEvaluation e = evaluate_loss(ParameterVector(0.4e-3, 1e-4, 1.0, 1.2), t, base);
  double sum = 0.0;
  for (const auto& r : e.residuals) {
    CHECK(r.relative == Approx((r.simulated - r.target) / r.target));
    sum += r.weight * r.relative * r.relative;
  }
  CHECK(e.value == Approx(sum).epsilon(1e-14));
}

TEST_CASE("out-of-bounds parameters are rejected") {
  const CalibrationBase base;
  CHECK_THROWS_AS(loss(ParameterVector(2e-3, 1e-4, 0.0, 1.0), CalibrationTargets::builtin(), base),
                  DomainError);
  CHECK_THROWS_AS(loss(ParameterVector(0.5e-3, 1e-4, -0.1, 1.0), CalibrationTargets::builtin(), base),
                  DomainError);
}

TEST_CASE("bounds map to and from the unit cube") {
  const ParameterBounds b;
  const ParameterVector x(0.7e-3, 2e-4, 2.0, 1.1);
  CHECK((b.from_unit(b.to_unit(x)) - x).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.to_unit(b.lower).isZero());
  CHECK(b.clamp(ParameterVector(1.0, -1.0, 9.0, 0.0)) == ParameterVector(b.upper(0), b.lower(1), b.upper(2), b.lower(3)));
}

TEST_CASE("synthetic round trip recovers the generating parameters") {
  const CalibrationBase base;
  const CalibrationTargets t = synthetic(kTruth, base);
  const FitResult r = fit(t, base, 5000);
  CHECK(r.loss < 1e-6);
  for (int i = 0; i < kParameterCount; ++i) {
    CAPTURE(i);
    CHECK(r.params(i) == Approx(kTruth(i)).epsilon(0.05));
  }
  CHECK(base.bounds.contains(r.params));
}

TEST_CASE("tiny budget returns the best point without convergence") {
  const CalibrationBase base;
  const FitResult r = fit(CalibrationTargets::builtin(), base, 100);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 100);
  CHECK(base.bounds.contains(r.params));
  CHECK(r.loss == Approx(loss(r.params, CalibrationTargets::builtin(), base)));
  CHECK_THROWS_AS(fit(CalibrationTargets::builtin(), base, 99), DomainError);
}

TEST_CASE("built-in targets: fitted peaks within 15% and increasing") {
  const CalibrationBase base;
  const FitResult r = fit(CalibrationTargets::builtin(), base, 5000);
  CHECK(base.bounds.contains(r.params));
  CHECK(r.evaluations <= 5000);
  std::vector<double> peaks;
  for (const auto& res : r.residuals) {
    if (res.label.rfind("peak_speed", 0) == 0) {
      CHECK(std::abs(res.relative) < 0.15);
      peaks.push_back(res.simulated);
    }
  }
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0] < peaks[1]);
  CHECK(peaks[1] < peaks[2]);
  // Log records the best loss so far, so it never rises.
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].second <= r.log[i - 1].second);
}

TEST_CASE("fit is deterministic and independent of the job count") {
  const CalibrationBase base;
  FitOptions serial, parallel;
  parallel.jobs = 3;
  const FitResult a = fit(CalibrationTargets::builtin(), base, 800, serial);
  const FitResult b = fit(CalibrationTargets::builtin(), base, 800, parallel);
  CHECK(a.params == b.params);
  CHECK(a.loss == b.loss);
}

TEST_CASE("slow: built-in target fit is not beaten by a 20^4 grid") {
  const CalibrationBase base;
  const CalibrationTargets t = CalibrationTargets::builtin();
  const FitResult r = fit(t, base, 5000);
  const int g = 20;
  double best = INFINITY;
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b)
      for (int c = 0; c < g; ++c)
        for (int d = 0; d < g; ++d) {
          const ParameterVector u(a / (g - 1.0), b / (g - 1.0), c / (g - 1.0), d / (g - 1.0));
          best = std::min(best, loss(base.bounds.clamp(base.bounds.from_unit(u)), t, base));
        }
  MESSAGE("fit loss " << r.loss << ", grid minimum " << best);
  CHECK(r.loss <= best);
}
