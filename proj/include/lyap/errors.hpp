#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lyap {

// Precondition violated by a caller-supplied argument (bad k, bad dimension,
// non-stochastic row, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The driving chain has several closed classes, so the stationary law (and
// everything defined from it) is not determined by the model alone.
class AmbiguityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration would exceed the configured path budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double required, double limit)
      : std::runtime_error(what), required_(required), limit_(limit) {}

  double required() const noexcept { return required_; }
  double limit() const noexcept { return limit_; }

 private:
  double required_;
  double limit_;
};

// Operation only defined for a fixed fiber/exterior dimension (Ulam: d=2, k=1).
class UnsupportedDimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The invariant-lift LP has no feasible point at the current resolution.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double infeasibility,
                  std::vector<double> slacks)
      : std::runtime_error(what),
        infeasibility_(infeasibility),
        slacks_(std::move(slacks)) {}

  double infeasibility() const noexcept { return infeasibility_; }
  const std::vector<double>& slacks() const noexcept { return slacks_; }

 private:
  double infeasibility_;
  std::vector<double> slacks_;
};

// Configuration document failed validation; `path` is a JSON-pointer-like
// location of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace lyap
