#include "aesop/log.hpp"

#include <atomic>
#include <cstdio>

namespace aesop {

namespace {

std::atomic<LogLevel> g_level{LogLevel::kInfo};

void emit(const char* tag, std::string_view message) {
  std::fprintf(stderr, "[%s] %.*s\n", tag, static_cast<int>(message.size()), message.data());
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_info(std::string_view message) {
  if (g_level.load() >= LogLevel::kInfo) emit("info", message);
}

void log_debug(std::string_view message) {
  if (g_level.load() >= LogLevel::kDebug) emit("debug", message);
}

void log_warning(std::string_view message) { emit("warn", message); }

}  // namespace aesop
