#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tunesel {

// 6 significant digits by default; full precision = shortest round-trip
// representation.
std::string format_number(double value, bool full_precision = false);

// Flat "key value" lines, one per pair.
void write_key_values(std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& pairs);

} // namespace tunesel
