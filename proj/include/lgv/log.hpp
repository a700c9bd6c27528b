#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace lgv::log {

enum Level { quiet = 0, info = 1, debug = 2 };

inline Level level() {
    static Level lv = [] {
        const char* s = std::getenv("LGVORTEX_LOG");
        if (!s) return info;
        if (!std::strcmp(s, "quiet")) return quiet;
        if (!std::strcmp(s, "debug")) return debug;
        return info;
    }();
    return lv;
}

template <class... Args>
void msg(Level at, const char* fmt, Args... args) {
    if (level() >= at) {
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

} // namespace lgv::log
