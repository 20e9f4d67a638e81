#pragma once

#include <stdexcept>
#include <string>

namespace tgprior {

// Argument outside the domain of a function or operation.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Target value not attainable by a monotone function on its domain.
struct OutOfRangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// A selector scan reached its ceiling while the defining condition still held.
struct ScanExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed scenario or config input. `key` names the offending entry.
struct ConfigError : std::runtime_error {
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key(std::move(key)) {}
  std::string key;
};

}  // namespace tgprior
