#ifndef DIABENCH_FNV_HPP
#define DIABENCH_FNV_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace diabench {

/// FNV-1a, 64-bit. Platform-independent content fingerprints for run
/// manifests and template versions (not for security).
constexpr std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (char c : data) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a_hex(std::string_view data);

}  // namespace diabench

#endif  // DIABENCH_FNV_HPP
