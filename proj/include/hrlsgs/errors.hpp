#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrlsgs {

// Process exit codes used by the CLI, one per error class.
enum class ExitCode : int {
  ok = 0,
  config = 2,
  model = 3,
  numerical = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::numerical; }
};

// Invalid distribution or algorithm parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

// Data and operator do not describe a consistent Poisson model.
class ModelError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::model; }
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<std::size_t> indices = {})
      : Error(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

// Argument outside the domain of a generator (nonpositive entry, underflow).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Argument outside the range of a mirror gradient.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

inline std::string join_indices(const std::vector<std::size_t>& idx, std::size_t max_shown = 8) {
  std::string out;
  for (std::size_t k = 0; k < idx.size() && k < max_shown; ++k) {
    if (k) out += ", ";
    out += std::to_string(idx[k]);
  }
  if (idx.size() > max_shown) out += ", ...";
  return out;
}

}  // namespace detail
}  // namespace hrlsgs
