#include "doa/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "doa/errors.hpp"

namespace doa::csv {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& field, const char* what, std::size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || field.empty() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + field +
                         "'");
    return v;
}

long long parse_int(const std::string& field, const char* what, std::size_t line_no) {
    long long v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || field.empty())
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + field +
                         "'");
    return v;
}

void expect_header(const std::string& line, const char* expected) {
    if (trim(line) != expected)
        throw ParseError(std::string("line 1: expected header '") + expected + "', got '" +
                         trim(line) + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace doa::csv
