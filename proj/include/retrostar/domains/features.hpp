#pragma once

/**
 * Deterministic hashed 0/1 feature vectors for synthetic molecule ids.
 * Stands in for chemistry fingerprints when none are available.
 */

#include <cstdint>
#include <string>
#include <vector>

namespace retrostar {

namespace detail {
// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace detail

inline std::vector<double> hashed_features(const std::string& molecule, int width) {
    std::vector<double> out(static_cast<std::size_t>(width), 0.0);
    std::uint64_t h = detail::fnv1a(molecule);
    for (int i = 0; i < width; ++i) {
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdull;
        h ^= h >> 33;
        out[static_cast<std::size_t>(i)] = static_cast<double>(h & 1u);
    }
    return out;
}

}  // namespace retrostar
