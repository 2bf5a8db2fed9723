#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glfuse {

// Splits one comma-separated line. Fields may be wrapped in double quotes,
// with "" standing for a literal quote. Surrounding spaces are trimmed.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field only when it contains a comma, quote or leading/trailing space.
std::string csv_field(std::string_view text);

// Strict numeric parsing: the whole (trimmed) field must be consumed.
bool parse_double(std::string_view text, double& out);
bool parse_size(std::string_view text, std::size_t& out);

// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace glfuse
