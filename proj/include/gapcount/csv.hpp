#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gapcount {

/// Shortest-roundtrip-safe decimal text: 17 significant digits.
std::string format_real(double x);

/// Comma-joined row terminated by '\n'.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace gapcount
