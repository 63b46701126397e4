#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvg {

/// Mismatched manifolds, base points, shapes or other violated preconditions.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A logarithm was requested outside the injectivity domain of its base point.
class InjectivityError : public std::runtime_error {
 public:
  explicit InjectivityError(const std::string& what, std::ptrdiff_t vertex = -1)
      : std::runtime_error(what), vertex_(vertex) {}

  /// Offending vertex, or -1 when raised by a bare manifold kernel.
  std::ptrdiff_t vertex() const noexcept { return vertex_; }

 private:
  std::ptrdiff_t vertex_;
};

/// Invalid solver or pipeline configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mvg
