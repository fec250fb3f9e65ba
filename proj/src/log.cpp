#include "rbsgm/log.hpp"

#include <iostream>
#include <mutex>

namespace rbsgm {

namespace {

std::mutex& sink_mutex() {
  static std::mutex mutex;
  return mutex;
}

LogSink& sink() {
  static LogSink current;
  return current;
}

LogLevel& min_level() {
  static LogLevel level = LogLevel::Warning;
  return level;
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void set_log_level(LogLevel level) {
  std::lock_guard lock(sink_mutex());
  min_level() = level;
}

void log(LogLevel level, const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (level < min_level()) return;
  if (sink()) {
    sink()(level, message);
    return;
  }
  const char* tag = level == LogLevel::Warning ? "warning" : level == LogLevel::Info ? "info" : "debug";
  std::cerr << "[rbsgm " << tag << "] " << message << '\n';
}

}  // namespace rbsgm
