#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace subdata {

using RngEngine = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline RngEngine make_rng(std::uint64_t seed) { return RngEngine(seed); }

// Partial Fisher-Yates: k distinct draws from {0..n-1}, in draw order.
inline std::vector<int> sample_without_replacement(int n, int k, RngEngine& rng) {
    if (k < 0 || k > n) throw std::invalid_argument("sample_without_replacement: k out of range");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        int j = pick(rng);
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    return out;
}

inline std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
    RngEngine rng(seed);
    return sample_without_replacement(n, n, rng);
}

}  // namespace subdata
