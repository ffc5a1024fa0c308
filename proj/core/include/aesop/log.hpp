#pragma once

#include <string_view>

namespace aesop {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Writes one line to stderr when the level is enabled.
void log_info(std::string_view message);
void log_debug(std::string_view message);
void log_warning(std::string_view message);

}  // namespace aesop
