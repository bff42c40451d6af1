#pragma once

#include <string>
#include <vector>

#include "bbvp/domain.hpp"

namespace bbvp {

/// Parses "1 2.5 -3" or "1, 2.5, -3". Throws ErrorKind::BadInput.
Vec parse_vector(const std::string& text);
std::vector<int> parse_ints(const std::string& text);
double parse_double(const std::string& text);

/// Shortest form that round-trips: 17 significant digits.
std::string format_double(double value);

}  // namespace bbvp
