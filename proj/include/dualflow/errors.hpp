#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dualflow {

/// Invalid grid parameters.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dual state violates the feasibility floor of N = a*Id + 2B.
class Infeasible : public std::runtime_error {
 public:
  Infeasible(double margin, std::size_t time_index, std::size_t space_index);

  double margin() const noexcept { return margin_; }
  std::size_t time_index() const noexcept { return time_index_; }
  std::size_t space_index() const noexcept { return space_index_; }

 private:
  double margin_;
  std::size_t time_index_;
  std::size_t space_index_;
};

/// Cholesky pivot was not positive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration parse or validation failure.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incompatible field file.
class FieldFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dualflow
