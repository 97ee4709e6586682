#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pairstab {

/// Flat `key = value` experiment config. Every key is declared in a fixed
/// schema with a type; unknown keys and ill-typed values are config-errors
/// naming the offending line.
class Config {
 public:
  static Config parse(std::string_view contents, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  // Sets (or overrides) a key after parsing, with the same validation.
  void set(const std::string& key, const std::string& value);
  bool has(std::string_view key) const;

  std::string get_string(std::string_view key) const;
  double get_real(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::size_t> get_list(std::string_view key) const;

  // FNV-1a over the sorted, explicitly set `key=value` lines, excluding keys
  // that only steer where or how fast things run (out, jobs).
  std::uint64_t hash() const;
  // The explicit entries in sorted order.
  const std::map<std::string, std::string, std::less<>>& entries() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

enum class ValueType { integer, real, text, boolean, int_list };

struct KeyInfo {
  std::string_view key;
  ValueType type;
  std::string_view fallback;  // empty: no default
  std::string_view doc;
};

const std::vector<KeyInfo>& config_schema();

}  // namespace pairstab
