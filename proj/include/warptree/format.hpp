#pragma once

#include <string>

namespace warptree {

/// Shortest form that round-trips through strtod (%.17g).
std::string format_double(double value);

}  // namespace warptree
