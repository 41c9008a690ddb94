#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

namespace pulsejet {

/// Tracked position-time series along the surge (or fall) axis.
struct Trace {
  Eigen::VectorXd t;
  Eigen::VectorXd x;
  std::optional<Eigen::VectorXd> y;
  std::string source;

  Eigen::Index size() const noexcept { return t.size(); }
  /// Mean sampling rate in Hz.
  double sample_rate() const;
  double duration() const { return t(t.size() - 1) - t(0); }

  /// Throws DomainError unless t is strictly increasing with at least 3 samples.
  void validate() const;
};

Trace make_trace(Eigen::VectorXd t, Eigen::VectorXd x, std::string source = {});

/// Central finite differences (one-sided at the two ends) followed by a
/// centred moving average of `window` samples. The averaging window shrinks
/// symmetrically near the ends.
Eigen::VectorXd velocity(const Trace& trace, int window = 5);

/// Largest odd window not above `window` or the sample count.
int clamp_window(int window, Eigen::Index samples);

}  // namespace pulsejet
