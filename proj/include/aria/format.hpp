#pragma once

#include <string>

namespace aria {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double v);

}  // namespace aria
