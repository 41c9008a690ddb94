#pragma once

#include "pulsejet/interpolation.hpp"

namespace pulsejet {

/// Reduced description of the origami mantle: cavity volume V(s) and frontal
/// area A(s) as functions of the contraction coordinate s in [0, s_max].
/// All quantities are SI.
struct MantleGeometry {
  double body_length = 0.133;
  double V_tot = 0.5e-3;
  double A_expanded = 47.7e-4;
  double A_contracted = 11.6e-4;
  double s_max = 0.75;
  double A_nozzle = 1.0e-4;
  double A_valve = 4.0e-4;
  /// Replaces the linear endpoint law for A(s) when non-empty.
  PiecewiseLinear area_table;

  void validate() const;

  /// (A_expanded - A_contracted) / A_expanded
  double area_reduction() const { return (A_expanded - A_contracted) / A_expanded; }
  double expansion_ratio() const { return A_expanded / A_contracted; }
  /// Inlet area available during refill.
  double inlet_area(bool valves) const { return valves ? A_nozzle + A_valve : A_nozzle; }
};

template <typename Scalar>
Scalar linear_cavity_volume(const Scalar& s, const Scalar& v_tot) {
  return v_tot * (Scalar(1) - s);
}

template <typename Scalar>
Scalar linear_frontal_area(const Scalar& s, const Scalar& s_max, const Scalar& a_expanded,
                           const Scalar& a_contracted) {
  return a_expanded + (s / s_max) * (a_contracted - a_expanded);
}

/// V(s) = V_tot (1 - s). Throws DomainError for s outside [0, s_max].
double cavity_volume(double s, const MantleGeometry& geom);

double frontal_area(double s, const MantleGeometry& geom);

/// Volume pushed out by a stroke that ends at contraction s_end.
double expelled_volume(double s_end, const MantleGeometry& geom);

}  // namespace pulsejet
