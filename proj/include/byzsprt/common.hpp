#pragma once

#include <stdexcept>
#include <string>

namespace byzsprt {

/// Bad or inconsistent user-supplied configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate hypothesis pair (zero or non-finite divergence, non-finite
/// log-likelihood ratio on the support, failed constant search).
/// Raised at model load: CLI exit code 2. Raised mid-estimation it is
/// rewrapped as an EstimationError.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Estimation could not produce a usable number (all trials truncated,
/// no error events where some are required, ...). CLI exit code 3.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// A resource cap was hit (walk lattice too large, horizon cap while
/// widening, ...). CLI exit code 4.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace byzsprt
