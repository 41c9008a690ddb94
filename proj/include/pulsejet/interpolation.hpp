#pragma once

#include <vector>

namespace pulsejet {

/// Piecewise-linear table over strictly increasing knots, clamped outside the knot range.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  double operator()(double x) const;

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  bool empty() const noexcept { return knots_.empty(); }
  std::size_t size() const noexcept { return knots_.size(); }

  bool non_increasing() const noexcept;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace pulsejet
