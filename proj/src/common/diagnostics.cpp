#include "phototopic/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace phototopic {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) {
    current_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  WarningSink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_sink(
      [this](std::string_view msg) { messages_.emplace_back(msg); });
}

ScopedWarningCapture::~ScopedWarningCapture() {
  set_warning_sink(std::move(previous_));
}

}  // namespace phototopic
