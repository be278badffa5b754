#pragma once

#include "gbd/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace gbd {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double x);
std::string format_vec(const Vec& v, char sep = ' ');

std::vector<std::string> split_ws(std::string_view line);
double parse_double(std::string_view token);

}  // namespace gbd
