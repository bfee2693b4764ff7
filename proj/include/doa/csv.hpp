#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace doa::csv {

/// Splits one CSV line on commas (no quoting in any of the schemas here)
/// and trims surrounding whitespace from each field.
std::vector<std::string> split(const std::string& line);

std::string trim(const std::string& s);

/// Checked field parsers; errors mention the field name and 1-based line.
double parse_double(const std::string& field, const char* what, std::size_t line_no);
long long parse_int(const std::string& field, const char* what, std::size_t line_no);

/// Throws ParseError unless the header matches the expected column list.
void expect_header(const std::string& line, const char* expected);

/// Fixed-format double for CSV output; round-trips exactly.
std::string format_double(double v);

}  // namespace doa::csv
