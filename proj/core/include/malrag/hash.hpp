#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace malrag {

// FNV-1a, 64-bit. Used for the mock embedder's token buckets, the scripted
// chat transcript keys, and the store's corpus/config fingerprints. The seed
// is fixed so vectors and ids are stable across runs and platforms.
inline constexpr std::uint64_t kFnvSeed = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvSeed) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace malrag
