#pragma once

#include <string_view>

namespace due {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold comes from DUE_LOG_LEVEL (error|warn|info|debug), default warn.
LogLevel log_threshold();
void set_log_threshold(LogLevel level);

void log(LogLevel level, std::string_view message);

}  // namespace due
