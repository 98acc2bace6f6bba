#include "diabench/fnv.hpp"

#include <cstdio>

namespace diabench {

std::string fnv1a_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(data)));
    return buf;
}

}  // namespace diabench
