#pragma once

#include <stdexcept>
#include <string>

namespace velest {

// Caller broke a documented precondition (bad argument, wrong state).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numeric input outside the domain of a formula (non-positive disparity,
// non-finite measurement, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed scenario, config, trace or file content.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace velest
