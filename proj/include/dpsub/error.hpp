#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpsub {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// One violated clause of the weight rule, with 0-based indices.
struct WeightViolation {
  enum class Kind { RowSum, SmallWeight, MissingSelfLoop, NegativeEntry };
  Kind kind;
  std::size_t row;
  std::size_t col;
  double value;
};

inline const char* to_string(WeightViolation::Kind kind) {
  switch (kind) {
    case WeightViolation::Kind::RowSum: return "RowSumError";
    case WeightViolation::Kind::SmallWeight: return "SmallWeightError";
    case WeightViolation::Kind::MissingSelfLoop: return "MissingSelfLoopError";
    case WeightViolation::Kind::NegativeEntry: return "NegativeEntryError";
  }
  return "?";
}

/// Raised by matrix validation. Carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<WeightViolation> issues)
      : Error(describe(issues)), issues_(std::move(issues)) {}

  const std::vector<WeightViolation>& issues() const noexcept { return issues_; }

  bool has(WeightViolation::Kind kind) const noexcept {
    for (const auto& v : issues_)
      if (v.kind == kind) return true;
    return false;
  }

 private:
  static std::string describe(const std::vector<WeightViolation>& issues) {
    std::string out = "invalid weight matrix:";
    for (const auto& v : issues) {
      out += ' ';
      out += to_string(v.kind);
      if (v.kind == WeightViolation::Kind::RowSum)
        out += " at row " + std::to_string(v.row + 1);
      else
        out += " at (" + std::to_string(v.row + 1) + "," + std::to_string(v.col + 1) + ")";
      out += " value " + std::to_string(v.value) + ";";
    }
    return out;
  }

  std::vector<WeightViolation> issues_;
};

class NotStronglyConnectedError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

class NonPositiveWeightError : public Error {
 public:
  using Error::Error;
};

class EmptyIntervalError : public Error {
 public:
  using Error::Error;
};

class StateCoupledScheduleError : public Error {
 public:
  using Error::Error;
};

class EmptyLibraryError : public Error {
 public:
  using Error::Error;
};

class BadPermutationError : public Error {
 public:
  using Error::Error;
};

class BlockLengthError : public Error {
 public:
  using Error::Error;
};

class CoincidentOptimaError : public Error {
 public:
  using Error::Error;
};

class DwellTimeoutError : public Error {
 public:
  using Error::Error;
};

/// Schedule misuse: out-of-order or concurrent queries of a state-coupled schedule.
class ScheduleContractError : public Error {
 public:
  using Error::Error;
};

class NoSeparationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The centralized solver hit its iteration cap. The best iterate is still usable.
class CapReachedError : public Error {
 public:
  CapReachedError(std::vector<double> best, double best_value, double stagnation)
      : Error("centralized solver reached its iteration cap (last window improvement " +
              std::to_string(stagnation) + ")"),
        best_(std::move(best)),
        best_value_(best_value),
        stagnation_(stagnation) {}

  const std::vector<double>& best() const noexcept { return best_; }
  double best_value() const noexcept { return best_value_; }
  double stagnation() const noexcept { return stagnation_; }

 private:
  std::vector<double> best_;
  double best_value_;
  double stagnation_;
};

class InequalityViolation : public Error {
 public:
  InequalityViolation(std::size_t agent, double slack)
      : Error("iterate inequality violated at agent " + std::to_string(agent + 1) +
              " (slack " + std::to_string(slack) + ")"),
        agent_(agent),
        slack_(slack) {}
  std::size_t agent() const noexcept { return agent_; }
  double slack() const noexcept { return slack_; }

 private:
  std::size_t agent_;
  double slack_;
};

class BoundViolation : public Error {
 public:
  BoundViolation(std::size_t agent, double magnitude, double bound)
      : Error("disturbance bound violated at agent " + std::to_string(agent + 1) + ": |w| = " +
              std::to_string(magnitude) + " > " + std::to_string(bound)),
        agent_(agent),
        magnitude_(magnitude),
        bound_(bound) {}
  std::size_t agent() const noexcept { return agent_; }
  double magnitude() const noexcept { return magnitude_; }
  double bound() const noexcept { return bound_; }

 private:
  std::size_t agent_;
  double magnitude_;
  double bound_;
};

class TraceTooShortError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; line and column are 1-based (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        reason_(what),
        line_(line),
        column_(column) {}
  const std::string& reason() const noexcept { return reason_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string reason_;
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpsub
