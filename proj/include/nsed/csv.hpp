#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nsed::csv {

using Row = std::vector<std::string>;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// RFC 4180 quoting when the field needs it.
std::string escape(std::string_view field);

std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<Row>& rows);

}  // namespace nsed::csv
