#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace mmray {

enum class LogLevel { debug, info, warning, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replace the process-wide sink; an empty function restores the stderr default.
void set_log_sink(LogSink sink);
void set_log_level(LogLevel minimum);

void log(LogLevel level, std::string_view message);

inline void log_warning(std::string_view message) { log(LogLevel::warning, message); }
inline void log_info(std::string_view message) { log(LogLevel::info, message); }
inline void log_debug(std::string_view message) { log(LogLevel::debug, message); }

}  // namespace mmray
