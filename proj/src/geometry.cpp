#include "pulsejet/geometry.hpp"

#include <fmt/format.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

namespace {

void check_contraction(double s, const MantleGeometry& geom, const char* what) {
  if (!(s >= 0.0 && s <= geom.s_max)) {
    throw DomainError(
        fmt::format("{}: contraction s = {} outside [0, {}]", what, s, geom.s_max));
  }
}

}  // namespace

void MantleGeometry::validate() const {
  if (!(A_contracted > 0.0 && A_contracted < A_expanded)) {
    throw ConfigError(fmt::format("geometry: need 0 < A_contracted ({}) < A_expanded ({})",
                                  A_contracted, A_expanded));
  }
  if (!(s_max > 0.0 && s_max <= 1.0)) {
    throw ConfigError(fmt::format("geometry: s_max = {} outside (0, 1]", s_max));
  }
  if (!(V_tot > 0.0)) throw ConfigError(fmt::format("geometry: V_tot = {} must be > 0", V_tot));
  if (!(A_nozzle > 0.0)) {
    throw ConfigError(fmt::format("geometry: A_nozzle = {} must be > 0", A_nozzle));
  }
  if (!(A_valve >= 0.0)) {
    throw ConfigError(fmt::format("geometry: A_valve = {} must be >= 0", A_valve));
  }
  if (!(body_length > 0.0)) throw ConfigError("geometry: body_length must be > 0");
  if (!area_table.empty() && !area_table.non_increasing()) {
    throw ConfigError("geometry: area table must be non-increasing in s");
  }
}

double cavity_volume(double s, const MantleGeometry& geom) {
  check_contraction(s, geom, "cavity_volume");
  return linear_cavity_volume(s, geom.V_tot);
}

double frontal_area(double s, const MantleGeometry& geom) {
  check_contraction(s, geom, "frontal_area");
  if (!geom.area_table.empty()) return geom.area_table(s);
  return linear_frontal_area(s, geom.s_max, geom.A_expanded, geom.A_contracted);
}

double expelled_volume(double s_end, const MantleGeometry& geom) {
  check_contraction(s_end, geom, "expelled_volume");
  return geom.V_tot * s_end;
}

}  // namespace pulsejet
