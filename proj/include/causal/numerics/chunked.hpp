#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <thread>
#include <vector>

namespace causal::numerics {

// Monte Carlo samples are partitioned into fixed-size chunks; chunk j draws
// from its own seed streams, so the merged result depends only on
// (seed, chunk_size) and never on the number of worker threads.
inline constexpr std::size_t kDefaultChunk = 8192;

// Runs `body(chunk_index, begin, end) -> Partial` for every chunk and folds
// the partials in chunk order with `merge(acc, partial)`.
template <class Partial, class Body, class Merge>
Partial run_chunked(std::size_t n, std::size_t chunk, Body&& body, Merge&& merge, Partial init = {}) {
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<Partial> parts(n_chunks);
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(n_chunks, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t j = 0; j < n_chunks; ++j) parts[j] = body(j, j * chunk, std::min(n, (j + 1) * chunk));
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t j = w; j < n_chunks; j += workers)
                    parts[j] = body(j, j * chunk, std::min(n, (j + 1) * chunk));
            }));
        }
        for (auto& job : jobs) job.get();
    }
    for (auto& p : parts) merge(init, p);
    return init;
}

}  // namespace causal::numerics
