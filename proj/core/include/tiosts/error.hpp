#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tiosts {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SortError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;

  [[nodiscard]] std::string str() const;
};

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);
  [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// A solver query answered "unknown" where a definite answer was required.
class SolverUnknown : public Error {
 public:
  using Error::Error;
};

class ExecutionError : public Error {
 public:
  using Error::Error;
};

// Sem membership could not be decided within the configured depth cap.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace tiosts
