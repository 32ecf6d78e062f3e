#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace planestack {

/// Splits [0, n) into `shards` contiguous ranges and runs fn(begin, end, shard) on each.
/// Shard boundaries depend only on (n, shards), so reductions that combine per-shard
/// partials in shard order are deterministic for a fixed shard count.
template <typename Fn>
void for_each_shard(std::size_t n, int shards, Fn&& fn) {
    shards = std::max(1, shards);
    if (n == 0) return;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(shards), n);
    auto bound = [&](std::size_t s) { return n * s / count; };
    if (count == 1) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(count);
    pool.reserve(count - 1);
    for (std::size_t s = 1; s < count; ++s) {
        pool.emplace_back([&, s] {
            try {
                fn(bound(s), bound(s + 1), s);
            } catch (...) {
                errors[s] = std::current_exception();
            }
        });
    }
    try {
        fn(bound(0), bound(1), std::size_t{0});
    } catch (...) {
        errors[0] = std::current_exception();
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace planestack
