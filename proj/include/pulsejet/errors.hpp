#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulsejet {

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A parameter set, schedule or configuration file violates an invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A query falls outside the extent of the data it is asked about.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The integrator produced a non-finite state.
class IntegrationFault : public std::runtime_error {
 public:
  IntegrationFault(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Terminal-fall identification could not find a velocity plateau.
class IdentificationError : public std::runtime_error {
 public:
  IdentificationError(const std::string& what, double final_relative_slope)
      : std::runtime_error(what), final_relative_slope_(final_relative_slope) {}
  /// Relative velocity change per second at the end of the trace.
  double final_relative_slope() const noexcept { return final_relative_slope_; }

 private:
  double final_relative_slope_;
};

}  // namespace pulsejet
