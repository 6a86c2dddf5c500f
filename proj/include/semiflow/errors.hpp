#pragma once

#include <stdexcept>
#include <string>

namespace semiflow {

// invalid input: bad parameters, domain violations, malformed configs
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// a numerical procedure failed to deliver its contract
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace semiflow
