#include "pourl/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace pourl::log {
namespace {

Level parse_env() {
  const char* raw = std::getenv("POURL_LOG");
  if (raw == nullptr) return Level::Error;
  const std::string value(raw);
  if (value == "off") return Level::Off;
  if (value == "error") return Level::Error;
  if (value == "info") return Level::Info;
  if (value == "debug") return Level::Debug;
  return Level::Error;
}

Level& current() {
  static Level level = parse_env();
  return level;
}

const char* tag(Level level) {
  switch (level) {
    case Level::Error: return "error";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
    default: return "?";
  }
}

}  // namespace

Level level() { return current(); }

void set_level(Level level) { current() = level; }

bool enabled(Level level) {
  return static_cast<int>(level) <= static_cast<int>(current()) && level != Level::Off;
}

void write(Level level, const std::string& message) {
  if (!enabled(level)) return;
  std::fprintf(stderr, "[pourl %s] %s\n", tag(level), message.c_str());
}

}  // namespace pourl::log
