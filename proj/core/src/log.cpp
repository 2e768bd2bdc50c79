#include "topics/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace topics::logging {

namespace {

Level parse_env() {
  const char* v = std::getenv("TOPICS_LOG");
  if (v == nullptr || *v == '\0') return Level::kWarn;
  if (std::strcmp(v, "error") == 0 || std::strcmp(v, "0") == 0) return Level::kError;
  if (std::strcmp(v, "warn") == 0 || std::strcmp(v, "1") == 0) return Level::kWarn;
  if (std::strcmp(v, "info") == 0 || std::strcmp(v, "2") == 0) return Level::kInfo;
  if (std::strcmp(v, "debug") == 0 || std::strcmp(v, "3") == 0) return Level::kDebug;
  return Level::kWarn;
}

const char* tag(Level level) {
  switch (level) {
    case Level::kError: return "error";
    case Level::kWarn: return "warn";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "?";
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level threshold() {
  static const Level t = parse_env();
  return t;
}

bool enabled(Level level) { return static_cast<int>(level) <= static_cast<int>(threshold()); }

void write(Level level, const std::string& message) {
  if (!enabled(level)) return;
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::fprintf(stderr, "[topics:%s] %s\n", tag(level), message.c_str());
}

}  // namespace topics::logging
