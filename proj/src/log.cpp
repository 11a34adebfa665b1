#include "cyclofrag/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace cyclofrag::log {

namespace {

Level level_from_env() {
  const char* env = std::getenv("CYCLOFRAG_LOG");
  if (env == nullptr) return Level::Info;
  if (std::strcmp(env, "error") == 0) return Level::Error;
  if (std::strcmp(env, "debug") == 0) return Level::Debug;
  return Level::Info;
}

std::atomic<Level>& level_store() {
  static std::atomic<Level> lvl{level_from_env()};
  return lvl;
}

}  // namespace

Level level() { return level_store().load(std::memory_order_relaxed); }

void set_level(Level lvl) { level_store().store(lvl, std::memory_order_relaxed); }

bool enabled(Level lvl) { return static_cast<int>(lvl) <= static_cast<int>(level()); }

void write(Level lvl, const std::string& message) {
  if (!enabled(lvl)) return;
  const char* tag = lvl == Level::Error ? "error" : (lvl == Level::Debug ? "debug" : "info");
  std::fprintf(stderr, "cyclofrag [%s] %s\n", tag, message.c_str());
}

}  // namespace cyclofrag::log
