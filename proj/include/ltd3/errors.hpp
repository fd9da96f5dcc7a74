#pragma once

#include <stdexcept>
#include <string>

namespace ltd3 {

/// Shape or length mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked in a state that does not admit it (stepping a finished
/// episode, sampling an underfull buffer, mismatched tape).
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

/// NaN/Inf encountered where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Malformed, unknown or inconsistent configuration. `key()` names the
/// offending entry when there is one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, std::string key = {})
      : std::runtime_error(msg), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Input data violating a documented precondition (e.g. unnormalized table).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace ltd3
