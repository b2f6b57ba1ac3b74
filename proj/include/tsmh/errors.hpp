#pragma once

#include <stdexcept>
#include <string>

namespace tsmh {

/// Malformed input data: vocabulary files, category specs, corpora, DSL text.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Task or chain configuration rejected during validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scoring backend (model file, bridge service) failed or misbehaved.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formula text that does not match the constraint grammar.
class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& message, std::size_t column)
      : InputError(message + " at offset " + std::to_string(column)), column_(column) {}

  /// 1-based column of the offending character; one past the end for truncated input.
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

}  // namespace tsmh
