#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace angcorr {

/// Invalid argument or parameter outside the domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite value produced while evaluating an integrand or model.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested evaluation outside a tabulated grid.
class ExtrapolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive integration did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error_estimate,
                   std::size_t intervals)
      : std::runtime_error(format(what, estimate, error_estimate, intervals)),
        estimate_(estimate),
        error_estimate_(error_estimate),
        intervals_(intervals) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }
  std::size_t intervals() const noexcept { return intervals_; }

 private:
  static std::string format(const std::string& what, double estimate, double error_estimate, std::size_t intervals) {
    std::ostringstream os;
    os << what << " (estimate=" << estimate << ", error=" << error_estimate << ", intervals=" << intervals << ")";
    return os.str();
  }

  double estimate_;
  double error_estimate_;
  std::size_t intervals_;
};

/// Malformed text input (CSV, config).  Line numbers are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Hard-core center placement could not be completed.
class PackingInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few peaks for the requested statistic.
class InsufficientPeaksError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace angcorr
