#pragma once

#include <cstdarg>

namespace panmap {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

// Level comes from the PANMAP_LOG environment variable
// (debug|info|warn|error); default is info.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const char* fmt, ...);

}  // namespace panmap

#define PANMAP_LOG_DEBUG(...) \
  ::panmap::log_message(::panmap::LogLevel::kDebug, __VA_ARGS__)
#define PANMAP_LOG_INFO(...) \
  ::panmap::log_message(::panmap::LogLevel::kInfo, __VA_ARGS__)
#define PANMAP_LOG_WARN(...) \
  ::panmap::log_message(::panmap::LogLevel::kWarn, __VA_ARGS__)
#define PANMAP_LOG_ERROR(...) \
  ::panmap::log_message(::panmap::LogLevel::kError, __VA_ARGS__)
