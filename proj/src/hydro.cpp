#include "pulsejet/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

void HydroParams::validate() const {
  if (!(rho > 0.0)) throw ConfigError(fmt::format("hydro: rho = {} must be > 0", rho));
  if (cda_table.empty()) throw ConfigError("hydro: C_D*A table is empty");
  for (double v : cda_table.values()) {
    if (!(v > 0.0)) throw ConfigError(fmt::format("hydro: C_D*A knot value {} must be > 0", v));
  }
  if (!cda_table.non_increasing()) {
    throw ConfigError("hydro: C_D*A must be non-increasing in s");
  }
  if (!(c_added >= 0.0)) throw ConfigError("hydro: c_added must be >= 0");
  if (!(c_suction >= 0.0)) throw ConfigError("hydro: c_suction must be >= 0");
}

HydroParams HydroParams::defaults(const MantleGeometry& geom, double cd) {
  std::vector<double> knots;
  for (double s : {0.0, 0.25, 0.5, 0.75}) {
    if (s < geom.s_max) knots.push_back(s);
  }
  knots.push_back(geom.s_max);
  std::vector<double> values;
  values.reserve(knots.size());
  for (double s : knots) values.push_back(cd * frontal_area(s, geom));
  HydroParams params;
  params.cda_table = PiecewiseLinear(std::move(knots), std::move(values));
  return params;
}

HydroParams HydroParams::with_cda_scale(double factor) const {
  std::vector<double> values = cda_table.values();
  for (double& v : values) v *= factor;
  HydroParams scaled = *this;
  scaled.cda_table = PiecewiseLinear(cda_table.knots(), std::move(values));
  return scaled;
}

double drag_force(double rho, double cda, double u) {
  if (!(rho > 0.0)) throw DomainError(fmt::format("drag_force: rho = {} must be > 0", rho));
  if (!(cda >= 0.0)) throw DomainError(fmt::format("drag_force: CdA = {} must be >= 0", cda));
  return quadratic_drag(rho, cda, u);
}

double terminal_velocity(double f_net, double rho, double cda) {
  if (!(f_net > 0.0 && rho > 0.0 && cda > 0.0)) {
    throw DomainError(fmt::format(
        "terminal_velocity: arguments must be positive (F_net={}, rho={}, CdA={})", f_net, rho,
        cda));
  }
  return terminal_speed(f_net, rho, cda);
}

double cda_from_terminal_velocity(double f_net, double rho, double u_t) {
  if (!(f_net > 0.0 && rho > 0.0 && u_t > 0.0)) {
    throw DomainError(fmt::format(
        "cda_from_terminal_velocity: arguments must be positive (F_net={}, rho={}, U_t={})",
        f_net, rho, u_t));
  }
  return 2.0 * f_net / (rho * u_t * u_t);
}

double cda_at(double s, const HydroParams& params) {
  if (params.cda_table.empty()) throw ConfigError("cda_at: C_D*A table is empty");
  return params.cda_table(s);
}

FallIdentification identify_cda_from_fall(const FallExperiment& experiment, double rho,
                                          const PlateauCriteria& criteria) {
  const Trace& trace = experiment.trace;
  trace.validate();
  if (!(experiment.F_net > 0.0)) {
    throw DomainError(fmt::format("identify_cda_from_fall: F_net = {} must be > 0",
                                  experiment.F_net));
  }
  const Eigen::Index n = trace.size();
  const Eigen::VectorXd v = velocity(trace, clamp_window(criteria.smoothing, n));
  const auto& t = trace.t;

  // Relative change of v over the trailing window, per sample. Samples closer
  // than one window to the start compare against the first sample.
  Eigen::VectorXd change(n);
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    while (j + 1 <= i && t(j + 1) <= t(i) - criteria.window) ++j;
    change(i) = std::abs(v(i)) > 0.0 ? std::abs(v(i) - v(j)) / std::abs(v(i))
                                     : std::numeric_limits<double>::infinity();
  }

  if (!(change(n - 1) < criteria.tolerance)) {
    const double slope = change(n - 1) / criteria.window;
    throw IdentificationError(
        fmt::format("no terminal plateau: relative velocity change {:.3g} over the last {} s",
                    change(n - 1), criteria.window),
        slope);
  }
  Eigen::Index begin = n - 1;
  while (begin > 0 && change(begin - 1) < criteria.tolerance) --begin;

  const auto plateau = v.segment(begin, n - begin);
  FallIdentification result;
  result.u_t = plateau.mean();
  result.u_t_std = std::sqrt((plateau.array() - result.u_t).square().mean());
  result.window_begin = t(begin);
  result.window_end = t(n - 1);
  if (!(result.u_t > 0.0)) {
    throw IdentificationError("plateau velocity is not positive", 0.0);
  }
  result.cda = cda_from_terminal_velocity(experiment.F_net, rho, result.u_t);
  return result;
}

}  // namespace pulsejet
