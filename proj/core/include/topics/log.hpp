#pragma once

#include <string>

namespace topics::logging {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Threshold parsed once from the TOPICS_LOG environment variable.
/// Accepts "error", "warn", "info", "debug" or the digits 0-3. Default: warn.
Level threshold();

bool enabled(Level level);

void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::kError, m); }
inline void warn(const std::string& m) { write(Level::kWarn, m); }
inline void info(const std::string& m) { write(Level::kInfo, m); }
inline void debug(const std::string& m) { write(Level::kDebug, m); }

}  // namespace topics::logging
