#include "parfluor/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace parfluor::log {

namespace {

Level level_from_env() {
  const char* env = std::getenv("PARFLUOR_LOG");
  if (env == nullptr) return Level::warn;
  const std::string v(env);
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  if (v == "error") return Level::error;
  if (v == "off") return Level::off;
  return Level::warn;
}

std::atomic<Level>& threshold() {
  static std::atomic<Level> t{level_from_env()};
  return t;
}

constexpr const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "";
  }
}

}  // namespace

void set_level(Level level) { threshold().store(level); }
Level level() { return threshold().load(); }

void write(Level l, std::string_view message) {
  if (l < threshold().load() || l == Level::off) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[parfluor " << tag(l) << "] " << message << '\n';
}

}  // namespace parfluor::log
