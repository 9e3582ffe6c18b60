#pragma once

#include <cstdint>
#include <future>
#include <thread>
#include <vector>

namespace heavytail {

// splitmix64: tiny, well-studied 64-bit generator. Used directly as the sample
// stream and to derive independent per-chunk seeds. Uniform variates are built
// from raw bits so that output is identical on every platform and run.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]: never zero, so 1/u and u^(-1/alpha) are always finite.
    double u01_open_closed() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double u01_half_open() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
};

// Independent stream seed for (master seed, stream index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    Rng r(master ^ (0x8e2c6d184ba2b9c5ULL + stream * 0xd1342543de82ef95ULL));
    r.next_u64();
    return r.next_u64();
}

// Fixed chunk size for parallel Monte Carlo. Each chunk owns a seed derived from
// (master seed, chunk index), so results are byte-identical for any thread count.
constexpr std::uint64_t kChunkSize = 1u << 16;

// Run `body(rng, count)` over n samples split into fixed-size chunks; partial
// results (integer counts or similar) are merged in chunk order via `merge`.
template <class Result, class Body, class Merge>
Result run_chunks(std::uint64_t n, std::uint64_t seed, int threads, Body body, Merge merge,
                  Result init = Result{}) {
    std::uint64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
    if (threads < 1) threads = 1;
    if (n == 0) return init;

    auto run_range = [&](std::uint64_t first, std::uint64_t stride) {
        Result acc{};
        bool have = false;
        for (std::uint64_t c = first; c < n_chunks; c += stride) {
            std::uint64_t count = std::min<std::uint64_t>(kChunkSize, n - c * kChunkSize);
            Rng rng(derive_seed(seed, c));
            Result part = body(rng, count);
            acc = have ? merge(acc, part) : part;
            have = true;
        }
        return std::pair<bool, Result>(have, acc);
    };

    if (threads == 1 || n_chunks == 1) {
        auto [have, acc] = run_range(0, 1);
        return have ? merge(init, acc) : init;
    }

    std::vector<std::future<std::pair<bool, Result>>> futs;
    futs.reserve(threads);
    for (int t = 0; t < threads; ++t)
        futs.push_back(std::async(std::launch::async, run_range, static_cast<std::uint64_t>(t),
                                  static_cast<std::uint64_t>(threads)));
    Result acc = init;
    for (auto& f : futs) {
        auto [have, part] = f.get();
        if (have) acc = merge(acc, part);
    }
    return acc;
}

}  // namespace heavytail
