#ifndef PREFTRANSFER_TEXT_H_
#define PREFTRANSFER_TEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace preftransfer {

/// Splits on every occurrence of `sep`; empty fields are kept.
std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

/// Quotes a CSV field when it holds a comma, quote or line break.
std::string csv_field(std::string_view text);
/// Parses one CSV record with double-quote escaping.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest decimal form that round-trips exactly.
std::string format_double(double value);

/// Strict parsers: the whole (trimmed) field must be consumed.
std::optional<double> try_parse_double(std::string_view text);
std::optional<std::int64_t> try_parse_int(std::string_view text);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

}  // namespace preftransfer

#endif  // PREFTRANSFER_TEXT_H_
