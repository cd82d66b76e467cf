#pragma once

#include <stdexcept>
#include <string>

namespace qdpt {

/// Input vector does not fit the environment's input space.
class RejectedInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A policy produced an action outside the declared action space, or a caller
/// broke an interface precondition (stepping a finished episode, for instance).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numeric parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown names, inconsistent budgets, malformed config files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the Taxi map parser; carries a 1-based line/column position.
class MapParseError : public std::runtime_error {
 public:
  MapParseError(int line, int column, const std::string& what)
      : std::runtime_error("taxi map " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class TrainingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few points for a k-NN statistic.
class InsufficientDataError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A campaign of an experiment failed; completed logs are kept.
class CampaignFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdpt
