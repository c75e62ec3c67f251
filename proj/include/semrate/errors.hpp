#pragma once

#include <stdexcept>
#include <string>

namespace semrate {

// Raised for any invalid input: malformed files, out-of-range parameters,
// inconsistent action sets. `field()` names the offending setting so the CLI
// can echo it back.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        message_(message) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace semrate
