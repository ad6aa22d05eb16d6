#pragma once

#include <stdexcept>
#include <string>

namespace crmac {

// Bad user-supplied configuration (duplicate ids, impossible flow counts,
// out-of-range parameters).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace crmac
