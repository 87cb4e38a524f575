#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace cspsketch {

inline constexpr const char* kVersion = "0.1.0";

/// Runtime error raised by every operation in this library. Messages name the
/// offending quantity (index, file, token) so CLI users can act on them.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

template <typename... Args>
[[noreturn]] inline void fail(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    throw Error(buf);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

/// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Integer power, q^k style quantities. Guards against overflow past 2^62.
inline std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > (std::int64_t(1) << 62) / base) throw Error("ipow: overflow");
        r *= base;
    }
    return r;
}

}  // namespace cspsketch
