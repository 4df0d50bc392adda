#pragma once

#include <cstdio>
#include <string>

namespace avalign::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from the AVALIGN_LOG environment variable
// ("error", "warn", "info", "debug"); default is "warn".
Level threshold();

void emit(Level level, const std::string& msg);

inline void error(const std::string& msg) { emit(Level::Error, msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, msg); }
inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void debug(const std::string& msg) { emit(Level::Debug, msg); }

}  // namespace avalign::log
