#pragma once

#include <cmath>

#include "pulsejet/geometry.hpp"
#include "pulsejet/interpolation.hpp"
#include "pulsejet/trace.hpp"

namespace pulsejet {

/// Fluid and drag parameters. The drag is carried as an effective drag-area
/// C_D*A tabulated against contraction.
struct HydroParams {
  double rho = 1000.0;
  PiecewiseLinear cda_table;
  /// Added mass, as a multiple of rho * V_tot.
  double c_added = 0.0;
  /// Refill intake loss coefficient.
  double c_suction = 0.0;

  void validate() const;

  /// Knots at s = {0, 0.25, 0.5, 0.75} (clipped to s_max) with C_D*A = cd * A(s).
  static HydroParams defaults(const MantleGeometry& geom, double cd = 1.0);

  /// Copy with every C_D*A knot multiplied by `factor`.
  HydroParams with_cda_scale(double factor) const;
};

/// Magnitude-signed quadratic drag 0.5 rho CdA U|U|. The force on the body is
/// the negative of this.
template <typename Scalar>
Scalar quadratic_drag(const Scalar& rho, const Scalar& cda, const Scalar& u) {
  using std::abs;
  return Scalar(0.5) * rho * cda * u * abs(u);
}

template <typename Scalar>
Scalar terminal_speed(const Scalar& f_net, const Scalar& rho, const Scalar& cda) {
  using std::sqrt;
  return sqrt(Scalar(2) * f_net / (rho * cda));
}

/// Throws DomainError on negative CdA or non-positive rho.
double drag_force(double rho, double cda, double u);

/// Speed at which drag balances `f_net`. All arguments must be positive.
double terminal_velocity(double f_net, double rho, double cda);

/// Inverse of terminal_velocity: CdA = 2 F / (rho U^2).
double cda_from_terminal_velocity(double f_net, double rho, double u_t);

/// Interpolated C_D*A at contraction s, clamped at the end knots.
double cda_at(double s, const HydroParams& params);

struct FallExperiment {
  /// Net downward force W - B.
  double F_net = 0.0;
  /// Vertical position (positive downward) against time.
  Trace trace;
};

/// Terminal regime: the velocity's relative change over the trailing
/// `window` seconds stays below `tolerance`.
struct PlateauCriteria {
  double window = 0.5;
  double tolerance = 0.01;
  /// Smoothing window, in samples, applied when differentiating the trace.
  int smoothing = 5;
};

struct FallIdentification {
  double cda = 0.0;
  double u_t = 0.0;
  double u_t_std = 0.0;
  double window_begin = 0.0;
  double window_end = 0.0;
};

/// Estimates U_t as the mean velocity over the terminal plateau at the end of
/// the trace and inverts the drag balance. Throws IdentificationError when the
/// trace ends before the plateau.
FallIdentification identify_cda_from_fall(const FallExperiment& experiment, double rho,
                                          const PlateauCriteria& criteria = {});

}  // namespace pulsejet
