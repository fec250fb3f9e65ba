#pragma once

#include <functional>
#include <string>

namespace rbsgm {

enum class LogLevel { Debug, Info, Warning };

/// Receives every diagnostic the library emits. Defaults to stderr for
/// warnings only.
using LogSink = std::function<void(LogLevel, const std::string&)>;

void set_log_sink(LogSink sink);
void set_log_level(LogLevel min_level);
void log(LogLevel level, const std::string& message);

}  // namespace rbsgm
