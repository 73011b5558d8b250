#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace n4d {

inline std::string format_sig(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    std::string s = buf;
    if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

// Round to 15 significant digits so that shortest round-trip printing is stable.
inline double sig15(double x) { return std::strtod(format_sig(x, 15).c_str(), nullptr); }

// Split [0, count) into contiguous chunks, one per thread.  Exceptions from
// workers are rethrown on the calling thread.
inline void parallel_for(int count, int threads, const std::function<void(int, int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads <= 1) {
        if (count > 0) body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (int t = 0; t < threads; ++t) {
        int b = static_cast<int>(static_cast<long long>(count) * t / threads);
        int e = static_cast<int>(static_cast<long long>(count) * (t + 1) / threads);
        pool.emplace_back([&, t, b, e] {
            try {
                body(b, e);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace n4d
