#include "esn/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace esn::log {

namespace {
std::atomic<Level> g_level{Level::warning};
std::mutex g_mutex;

const char* name(Level l)
{
    switch (l) {
    case Level::debug:
        return "debug";
    case Level::info:
        return "info";
    case Level::warning:
        return "warning";
    case Level::error:
        return "error";
    case Level::off:
        return "off";
    }
    return "";
}
} // namespace

void set_level(Level l)
{
    g_level = l;
}

Level level()
{
    return g_level;
}

void write(Level l, std::string_view message)
{
    if (l < g_level.load()) {
        return;
    }
    std::lock_guard lock(g_mutex);
    std::cerr << "[esn] " << name(l) << ": " << message << '\n';
}

} // namespace esn::log
