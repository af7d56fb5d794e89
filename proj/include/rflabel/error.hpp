#pragma once

#include <stdexcept>
#include <string>

namespace rflabel {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorKind { config = 2, io = 3, infeasible = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed or invariant-violating input (scene, annotations, specs, arguments).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// A well-formed request with no mathematical solution (no fix, no gamma fit,
/// point behind the camera, ...).
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

}  // namespace rflabel
