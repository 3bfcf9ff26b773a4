#include "warptree/format.hpp"

#include <cstdio>

namespace warptree {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

}  // namespace warptree
