#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pairstab::text {

// Shortest decimal that parses back to the identical double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view s, char sep);

// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace pairstab::text
