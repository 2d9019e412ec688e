#ifndef GFK_ERRORS_HPP
#define GFK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfk {

// Exit-code taxonomy used by the CLI:
//   2 -> ConfigError, 3 -> DataFormatError, 4 -> NumericError,
//   5 -> verification failure (no exception type; reported by the verifier).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataFormatError : public std::runtime_error {
 public:
  explicit DataFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violation of an API precondition (bad degree, signature mismatch, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace gfk

#endif
