#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vbmhe {

// fixed "%.17g" formatting: lossless round trip and byte-stable across runs
std::string format_double(double v);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace vbmhe
