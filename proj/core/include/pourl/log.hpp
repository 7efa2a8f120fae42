#pragma once

#include <string>

namespace pourl::log {

enum class Level { Off = 0, Error = 1, Info = 2, Debug = 3 };

// Current verbosity. Initialized once from the POURL_LOG environment
// variable (off | error | info | debug); defaults to error.
Level level();
void set_level(Level level);
bool enabled(Level level);

// Writes one line to stderr if the level is enabled. Logging never touches
// stdout or output files, so it cannot perturb deterministic artifacts.
void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::Error, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

}  // namespace pourl::log
