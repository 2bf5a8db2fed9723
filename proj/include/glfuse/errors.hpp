#pragma once

#include <stdexcept>
#include <string>

namespace glfuse {

/// Invalid argument to a sampler, summary or metric.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; the message carries the offending line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration that cannot be executed (missing files, bad tags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Gibbs chain reached a non-finite or non-positive state.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested a quantity that was not recorded during sampling.
class MissingQuantityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Metropolis oracle failed its own tuning diagnostics.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace glfuse
