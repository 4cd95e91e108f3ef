#pragma once

#include <chrono>
#include <cstdio>
#include <string>

namespace swag::acceptance {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Tally {
    int failed = 0;

    void line(int criterion, bool pass, const std::string& detail) {
        std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failed;
    }

    void skip(int criterion, const std::string& detail) {
        std::printf("criterion %d: SKIP  %s\n", criterion, detail.c_str());
        std::fflush(stdout);
    }
};

inline std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

} // namespace swag::acceptance
