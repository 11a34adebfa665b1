#pragma once

#include <string>

namespace cyclofrag::log {

// Verbosity is read once from the CYCLOFRAG_LOG environment variable
// (error | info | debug); unknown or unset values fall back to info.
enum class Level { Error = 0, Info = 1, Debug = 2 };

Level level();
void set_level(Level lvl);

bool enabled(Level lvl);
void write(Level lvl, const std::string& message);

inline void error(const std::string& message) { write(Level::Error, message); }
inline void info(const std::string& message) { write(Level::Info, message); }
inline void debug(const std::string& message) { write(Level::Debug, message); }

}  // namespace cyclofrag::log
