#ifndef PERSONA_PONG_ERRORS_H_
#define PERSONA_PONG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace persona_pong {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidConfig = 2,
  kCheckpointIncompatible = 3,
  kNumericalDivergence = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::kInvalidConfig; }
};

// Invalid configuration values or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation requested on an object in the wrong state (e.g. stepping a
// finished match, sampling an empty buffer).
class StateError : public Error {
 public:
  using Error::Error;
};

// Unknown registry name.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Malformed argument: wrong shape, empty input, reward trace without terminus.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override {
    return ExitCode::kCheckpointIncompatible;
  }
};

class NumericalDivergence : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override {
    return ExitCode::kNumericalDivergence;
  }
};

}  // namespace persona_pong

#endif  // PERSONA_PONG_ERRORS_H_
