#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ellipt {

struct Warning {
  std::string module;
  std::string message;
};

using WarningSink = std::function<void(const Warning&)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes one `warning module=... message="..."` record per line to
// stderr.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view module, std::string_view message);

// Restores the previous sink on destruction; handy in tests.
class ScopedWarningCapture {
 public:
  explicit ScopedWarningCapture(std::vector<Warning>& into);
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace ellipt
