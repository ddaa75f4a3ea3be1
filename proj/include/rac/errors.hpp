#pragma once

#include <stdexcept>
#include <string>

namespace rac {

// A caller broke a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An engine detected a broken internal invariant (asymmetric maps, lost messages, ...).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input files and I/O failures. Messages carry path and line context.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rac
