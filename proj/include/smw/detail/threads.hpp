#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <string_view>
#include <thread>

namespace smw::detail {

/// Worker count for internal parallel loops: hardware concurrency, capped by
/// the SMW_THREADS environment variable when it holds a positive integer.
inline unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SMW_THREADS")) {
        const std::string_view s(env);
        unsigned cap = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) n = std::min(n, cap);
    }
    return n;
}

} // namespace smw::detail
