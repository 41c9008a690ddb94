#include "pulsejet/trace.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pulsejet/errors.hpp"

namespace pulsejet {

double Trace::sample_rate() const {
  return static_cast<double>(t.size() - 1) / duration();
}

void Trace::validate() const {
  if (t.size() != x.size()) throw DomainError("trace: t and x lengths differ");
  if (y && y->size() != t.size()) throw DomainError("trace: t and y lengths differ");
  if (t.size() < 3) {
    throw DomainError(fmt::format("trace: {} samples, need at least 3", t.size()));
  }
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    if (!(t(i) > t(i - 1))) {
      throw DomainError(fmt::format("trace: time not strictly increasing at sample {}", i));
    }
  }
}

Trace make_trace(Eigen::VectorXd t, Eigen::VectorXd x, std::string source) {
  Trace trace{std::move(t), std::move(x), std::nullopt, std::move(source)};
  trace.validate();
  return trace;
}

int clamp_window(int window, Eigen::Index samples) {
  Eigen::Index w = std::min<Eigen::Index>(window, samples);
  if (w % 2 == 0) --w;
  return static_cast<int>(std::max<Eigen::Index>(w, 1));
}

Eigen::VectorXd velocity(const Trace& trace, int window) {
  const Eigen::Index n = trace.size();
  if (window < 1 || window % 2 == 0 || window > n) {
    throw DomainError(fmt::format("velocity: window {} must be odd and in [1, {}]", window, n));
  }
  const auto& t = trace.t;
  const auto& x = trace.x;

  Eigen::VectorXd raw(n);
  raw(0) = (x(1) - x(0)) / (t(1) - t(0));
  raw(n - 1) = (x(n - 1) - x(n - 2)) / (t(n - 1) - t(n - 2));
  raw.segment(1, n - 2) = (x.tail(n - 2) - x.head(n - 2)).cwiseQuotient(t.tail(n - 2) - t.head(n - 2));

  if (window == 1) return raw;

  const Eigen::Index half = window / 2;
  Eigen::VectorXd smooth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index h = std::min({half, i, n - 1 - i});
    smooth(i) = raw.segment(i - h, 2 * h + 1).mean();
  }
  return smooth;
}

}  // namespace pulsejet
