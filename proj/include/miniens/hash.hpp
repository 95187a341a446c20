#pragma once

#include <cstdint>
#include <string_view>

namespace miniens {

// FNV-1a 64-bit. Used for input-file digests in run manifests and for vocab
// identity tags; a reproducibility fingerprint, not a cryptographic hash.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xCBF29CE484222325ULL) {
    std::uint64_t h = seed;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace miniens
