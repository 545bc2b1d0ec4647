#pragma once

#include <cstdint>
#include <random>

namespace geobo {

// splitmix64, used to derive independent seeds from a master seed plus a
// handful of stream identifiers (cell index, run index, purpose tag, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (a + 0x100000001b3ULL));
    s = splitmix64(s ^ (b + 0xcbf29ce484222325ULL));
    s = splitmix64(s ^ (c + 0x27d4eb2f165667c5ULL));
    return s;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64(derive_seed(master, a, b, c));
}

} // namespace geobo
