#include "avalign/log.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace avalign::log {

namespace {

Level parse_env() {
  const char* v = std::getenv("AVALIGN_LOG");
  if (v == nullptr) return Level::Warn;
  if (std::strcmp(v, "error") == 0) return Level::Error;
  if (std::strcmp(v, "warn") == 0) return Level::Warn;
  if (std::strcmp(v, "info") == 0) return Level::Info;
  if (std::strcmp(v, "debug") == 0) return Level::Debug;
  return Level::Warn;
}

std::mutex g_mutex;

}  // namespace

Level threshold() {
  static const Level level = parse_env();
  return level;
}

void emit(Level level, const std::string& msg) {
  if (level > threshold()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "avalign [%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace avalign::log
