#pragma once

#include <string>
#include <vector>

#include "twlab/types.hpp"

namespace twlab {

/// Shortest decimal form that round-trips to the same double (at most 17
/// significant digits); used everywhere a float lands in a CSV cell.
std::string format_double(double x);

std::string csv_row(const std::vector<std::string>& fields);

/// Complex scalar "a+bi" / "a-bi" parser for config values; accepts plain
/// reals, "i", "-i" and "0.8i".
Cplx parse_complex(const std::string& text);

}  // namespace twlab
