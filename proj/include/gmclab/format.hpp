#pragma once

#include <string>

namespace gmclab {

// Shortest representation that round-trips; used for every CSV/JSON number.
std::string format_double(double v);

}  // namespace gmclab
