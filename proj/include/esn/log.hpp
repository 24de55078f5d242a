#pragma once

#include <string_view>

namespace esn::log {

enum class Level { debug = 0, info = 1, warning = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();

/// Writes "[esn] <level>: <message>" to stderr when `level` is enabled.
void write(Level level, std::string_view message);

inline void info(std::string_view m) { write(Level::info, m); }
inline void warning(std::string_view m) { write(Level::warning, m); }

} // namespace esn::log
