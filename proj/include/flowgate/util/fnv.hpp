#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace flowgate::util {

// FNV-1a 64-bit content digest; stable across runs and platforms, which is
// all the sink manifests and transfer checks need.
inline uint64_t fnv1a64(std::span<const uint8_t> data) {
    uint64_t h = 1469598103934665603ULL;
    for (uint8_t b : data) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::span<const uint8_t> data) {
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

}  // namespace flowgate::util
