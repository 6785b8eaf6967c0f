#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace phototopic {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal conditions (reset topics, missing IC values, ...) are reported
// here. The default sink writes "warning: <msg>" to stderr.
void warn(std::string_view message);

// Installs `sink` and returns the previous one. Passing an empty function
// restores the stderr sink.
WarningSink set_warning_sink(WarningSink sink);

// Captures warnings for the lifetime of the object; used by tests and by the
// CLI's --quiet handling.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningSink previous_;
};

}  // namespace phototopic
