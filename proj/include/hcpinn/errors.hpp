#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcpinn {

/// Invalid configuration: bad dimensions, unknown names, inconsistent specs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure outside training (quadrature, zero norms).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long index = -1)
      : std::runtime_error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

/// Non-finite loss or residual during training. Carries the batch and
/// point that produced the offending value (-1 when unknown).
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, long batch, long point = -1)
      : std::runtime_error(what), batch_(batch), point_(point) {}
  long batch() const { return batch_; }
  long point() const { return point_; }

 private:
  long batch_;
  long point_;
};

}  // namespace hcpinn
