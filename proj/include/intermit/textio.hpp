#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace intermit {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Splits on LF; a trailing CR per line is stripped. The trailing empty
/// segment after a final LF is dropped. Views point into `text`.
std::vector<std::string_view> split_lines(std::string_view text);

/// RFC-4180 quoting: the field is wrapped in double quotes when it contains
/// a comma, quote, CR or LF, with inner quotes doubled.
std::string csv_quote(std::string_view field);

/// Splits one CSV line into fields, honoring RFC-4180 quoting.
/// Throws ParseError(line_no, ...) on unbalanced or misplaced quotes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no);

/// Whole-file read/write. Failures throw ConfigError (unusable path).
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace intermit
