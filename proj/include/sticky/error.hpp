#pragma once

#include <stdexcept>
#include <string>

namespace sticky {

/// Malformed particle data, measure specs, or other inputs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time or index outside the simulated window.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Argument outside the mathematical domain of an operation (e.g. t = 0 where 1/t appears).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidSpec : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InvalidPartition : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InvalidGrid : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Requested time coincides with a collision event, where one-sided slopes differ.
class AmbiguousTime : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace sticky
