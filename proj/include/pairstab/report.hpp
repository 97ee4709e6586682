#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pairstab {

/// Structured text report: `key = value` header lines, a `---` separator,
/// then a CSV body whose first line names the columns. No timestamps, so two
/// runs with the same config and seed give identical bytes.
struct Report {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, value ? "true" : "false"); }
  // Throws malformed-file if the key is absent.
  const std::string& get(std::string_view key) const;
  bool has(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;

  std::size_t column(std::string_view name) const;

  std::string format() const;
  static Report parse(std::string_view contents);
  void save(const std::string& path) const;
  static Report load(const std::string& path);
};

std::string hex_hash(std::uint64_t h);

}  // namespace pairstab
