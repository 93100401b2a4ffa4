#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace tqa {

// Bounded fan-out over [0, n). Work lands in caller-owned slots keyed by
// index, so results never depend on scheduling order.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t stripes = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::future<void>> futures;
    futures.reserve(stripes);
    for (std::size_t s = 0; s < stripes; ++s) {
        futures.push_back(std::async(std::launch::async, [&, s] {
            for (std::size_t i = s; i < n; i += stripes) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace tqa
