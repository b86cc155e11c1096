#pragma once

#include <stdexcept>
#include <string>

namespace dpp {

// Exit code contract: 0 success, 2 input error, 3 numerical failure.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, int exit_code)
      : std::runtime_error(message), code_(std::move(code)), exit_code_(exit_code) {}

  const std::string& code() const { return code_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string code_;
  int exit_code_;
};

// Malformed maps, configs, invalid interventions, bad parameters.
class InputError : public Error {
 public:
  InputError(std::string code, const std::string& message)
      : Error(std::move(code), message, 2) {}
};

// Non-convergence, infeasible/unbounded LPs, non-normalizable beliefs.
class NumericalError : public Error {
 public:
  NumericalError(std::string code, const std::string& message)
      : Error(std::move(code), message, 3) {}
};

}  // namespace dpp
