#include "ellipt/diag.hpp"

#include <iostream>
#include <mutex>
#include <vector>

namespace ellipt {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void stderr_sink(const Warning& w) {
  std::cerr << "warning module=" << w.module << " message=\"" << w.message
            << "\"\n";
}

WarningSink& current_sink() {
  static WarningSink sink = stderr_sink;
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  WarningSink previous = std::move(current_sink());
  current_sink() = sink ? std::move(sink) : WarningSink(stderr_sink);
  return previous;
}

void warn(std::string_view module, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  current_sink()(Warning{std::string(module), std::string(message)});
}

ScopedWarningCapture::ScopedWarningCapture(std::vector<Warning>& into)
    : previous_(set_warning_sink(
          [&into](const Warning& w) { into.push_back(w); })) {}

ScopedWarningCapture::~ScopedWarningCapture() {
  set_warning_sink(std::move(previous_));
}

}  // namespace ellipt
