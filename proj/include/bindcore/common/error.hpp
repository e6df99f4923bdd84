#pragma once

#include <stdexcept>
#include <string>

namespace bindcore {

// Library invariant or precondition violated by the caller. CLI exit code 4.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Shape mismatch between tensor operands.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Numerically meaningless input (for example a zero vector fed to a
// normalizer).
class DegenerateInputError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Malformed input file. CLI exit code 3.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or inconsistent data: dangling refs, empty splits, bad checkpoint.
// CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or command usage. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bindcore
