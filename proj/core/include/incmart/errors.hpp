#pragma once

#include <stdexcept>
#include <string>

namespace incmart {

// A time or index outside the span of a grid.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A finite-space process is not constant on the blocks of the partition it
// must be measurable with respect to.
class AdaptednessError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class MeasurabilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a callback tries to look past the information it was handed,
// e.g. a feature reading the path after its conditioning time.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace incmart
