#pragma once

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

namespace jca::log {

enum class Level { quiet = 0, info = 1, debug = 2 };

// Resolved once from JCA_LOG={quiet|info|debug}; default info.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("JCA_LOG");
        if (env == nullptr) return Level::info;
        if (std::strcmp(env, "quiet") == 0) return Level::quiet;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::info;
    }();
    return lvl;
}

inline void info(const std::string& msg) {
    if (level() >= Level::info) std::cerr << "[jca] " << msg << "\n";
}

inline void debug(const std::string& msg) {
    if (level() >= Level::debug) std::cerr << "[jca:debug] " << msg << "\n";
}

}  // namespace jca::log
