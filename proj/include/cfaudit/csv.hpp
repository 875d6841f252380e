#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cfaudit::csv {

// Splits one CSV record. Handles RFC-4180 style quoting; no embedded
// newlines (cohort fields never contain them).
std::vector<std::string> split_record(const std::string& line);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape_field(const std::string& field);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

std::optional<double> parse_double(const std::string& s);
std::optional<long long> parse_int(const std::string& s);

}  // namespace cfaudit::csv
