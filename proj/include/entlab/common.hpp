#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace entlab {

using Vertex = std::int32_t;

/// Base class for every error the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when an experiment exceeds its time or memory cap.
class ResourceExceeded : public Error {
public:
    using Error::Error;
};

/// SplitMix64. Cheap to construct, so a fresh generator can be seeded per
/// sample index; results then do not depend on how work is chunked.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Generator for stream `stream` of a run seeded with `seed`.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
    return SplitMix64(mix());
}

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

/// Runs fn(begin, end) over contiguous chunks of [0, n). Callers must only
/// write to index-disjoint outputs.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                         std::size_t min_chunk = 256) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), (n + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        if (n > 0) fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace entlab
