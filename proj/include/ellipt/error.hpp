#pragma once

#include <stdexcept>
#include <string>

namespace ellipt {

enum class ErrorKind {
  kInvalidInput,  // bad file, bad config, precondition violated by the caller
  kNumerical,     // rank deficiency, failed decomposition
};

// Every module reports failures through this type so the CLI can name the
// failing module and pick an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string module, ErrorKind kind, const std::string& message)
      : std::runtime_error(module + ": " + message),
        module_(std::move(module)),
        kind_(kind) {}

  const std::string& module() const noexcept { return module_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string module_;
  ErrorKind kind_;
};

inline Error input_error(std::string module, const std::string& message) {
  return Error(std::move(module), ErrorKind::kInvalidInput, message);
}

inline Error numerical_error(std::string module, const std::string& message) {
  return Error(std::move(module), ErrorKind::kNumerical, message);
}

}  // namespace ellipt
