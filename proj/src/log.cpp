#include "due/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <string>

namespace due {
namespace {

LogLevel parse_env() {
    const char* raw = std::getenv("DUE_LOG_LEVEL");
    if (raw == nullptr) return LogLevel::Warn;
    const std::string value(raw);
    if (value == "error") return LogLevel::Error;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

std::atomic<int>& threshold() {
    static std::atomic<int> level{static_cast<int>(parse_env())};
    return level;
}

const char* tag(LogLevel level) {
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "?";
}

}  // namespace

LogLevel log_threshold() { return static_cast<LogLevel>(threshold().load()); }

void set_log_threshold(LogLevel level) { threshold().store(static_cast<int>(level)); }

void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > threshold().load()) return;
    std::cerr << "[" << tag(level) << "] " << message << '\n';
}

}  // namespace due
