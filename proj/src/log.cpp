#include "mmray/log.hpp"

#include <iostream>
#include <mutex>

namespace mmray {
namespace {

std::mutex g_mutex;
LogSink g_sink;
LogLevel g_minimum = LogLevel::warning;

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warning: return "warning";
        case LogLevel::error: return "error";
    }
    return "?";
}

}  // namespace

void set_log_sink(LogSink sink) {
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void set_log_level(LogLevel minimum) {
    std::lock_guard lock(g_mutex);
    g_minimum = minimum;
}

void log(LogLevel level, std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (level < g_minimum) return;
    if (g_sink) {
        g_sink(level, message);
        return;
    }
    std::cerr << "mmray: " << level_name(level) << ": " << message << '\n';
}

}  // namespace mmray
