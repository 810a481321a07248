#pragma once

#include <stdexcept>
#include <string>

namespace hjbport {

// Process exit codes used by the command line tool. Library code throws the
// typed exceptions below; the CLI maps them to these codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitInvalidConfig = 2,
    kExitBlowUp = 3,
    kExitHashMismatch = 4,
    kExitMissingSeries = 5,
};

// Invalid or inconsistent user input (config files, parameter blocks).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violation of a mathematical precondition (domain errors, bad matrices).
class InputError : public std::invalid_argument {
  public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite or exploding values during the backward time march.
class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(const std::string& what, long step, long node)
        : std::runtime_error(what), step_index(step), node_index(node) {}
    long step_index;
    long node_index;
};

// Iterative method failed to converge (QP active-set cap, refinement cap).
class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Gram matrix too ill-conditioned to meet the interpolation tolerance.
class IllConditionedError : public std::runtime_error {
  public:
    IllConditionedError(const std::string& what, double condition)
        : std::runtime_error(what), condition_estimate(condition) {}
    double condition_estimate;
};

// Checkpoint fails its config-hash or format check.
class HashMismatchError : public std::runtime_error {
  public:
    explicit HashMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// A report command was asked for a series that is absent from its inputs.
class MissingSeriesError : public std::runtime_error {
  public:
    explicit MissingSeriesError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hjbport
