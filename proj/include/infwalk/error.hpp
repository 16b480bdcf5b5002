#pragma once

#include <stdexcept>
#include <string>

namespace infwalk {

/// Broad failure classes; each maps to one CLI exit status.
enum class ErrorKind {
  Usage,       // bad arguments or configuration values
  Validation,  // malformed input data, or a graph that fails the walkability gate
  Numerical,   // decomposition failure or violated numerical invariant
  Io,          // file system failures
};

inline int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::Validation: return 3;
    case ErrorKind::Numerical: return 4;
    case ErrorKind::Io: return 5;
  }
  return 1;
}

/// Exception carrying a machine-readable code such as "graph.bipartite".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline void require(bool condition, const char* code, const std::string& message) {
  if (!condition) throw Error(ErrorKind::Usage, code, message);
}

}  // namespace infwalk
