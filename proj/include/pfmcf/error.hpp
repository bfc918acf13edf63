#pragma once

#include <stdexcept>
#include <string>

namespace pfmcf {

/// A configuration invariant was violated. `invariant()` names the rule.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string invariant, const std::string& detail)
      : std::invalid_argument(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

private:
  std::string invariant_;
};

/// The interface has vanished: the √(2W)-weighted denominator of a nonlocal
/// term dropped below the degeneracy threshold.
class DegenerateError : public std::runtime_error {
public:
  explicit DegenerateError(double denominator)
      : std::runtime_error("degenerate denominator: integral of sqrt(2W(u)) = " +
                           std::to_string(denominator)),
        denominator_(denominator) {}

  double denominator() const noexcept { return denominator_; }

private:
  double denominator_;
};

/// Linear solve or ODE integration failed.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfmcf
