#include "tunesel/report.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>

namespace tunesel {

std::string format_number(double value, bool full_precision) {
    char buf[40];
    if (full_precision) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
        (void)ec;
        return std::string(buf, ptr);
    }
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return std::string(buf);
}

void write_key_values(std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& pairs) {
    for (const auto& [key, value] : pairs) out << key << ' ' << value << '\n';
}

} // namespace tunesel
