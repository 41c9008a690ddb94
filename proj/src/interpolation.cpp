#include "pulsejet/interpolation.hpp"

#include <algorithm>
#include <iterator>

#include "pulsejet/errors.hpp"

namespace pulsejet {

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) {
    throw ConfigError("interpolation table: knot and value counts differ");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw ConfigError("interpolation table: knots must be strictly increasing");
    }
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (knots_.empty()) throw ConfigError("interpolation table is empty");
  if (x <= knots_.front()) return values_.front();
  if (x >= knots_.back()) return values_.back();
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto i = static_cast<std::size_t>(std::distance(knots_.begin(), hi));
  const double x0 = knots_[i - 1];
  const double x1 = knots_[i];
  const double w = (x - x0) / (x1 - x0);
  return values_[i - 1] + w * (values_[i] - values_[i - 1]);
}

bool PiecewiseLinear::non_increasing() const noexcept {
  return std::is_sorted(values_.rbegin(), values_.rend());
}

}  // namespace pulsejet
