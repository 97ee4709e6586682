#include "pairstab/report.hpp"

#include <cstdio>
#include <sstream>

#include "pairstab/error.hpp"
#include "pairstab/text.hpp"

namespace pairstab {

void Report::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : header) {
    if (k == key) {
      v = value;
      return;
    }
  }
  header.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, text::format_double(value)); }
void Report::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

bool Report::has(std::string_view key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Report::get(std::string_view key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::malformed_file, "report lacks key '" + std::string(key) + "'");
}

double Report::get_double(std::string_view key) const {
  const auto v = text::parse_double(get(key));
  require(v.has_value(), ErrorCode::malformed_file, "report key '" + std::string(key) + "' is not a number");
  return *v;
}

std::uint64_t Report::get_uint(std::string_view key) const {
  const auto v = text::parse_int(get(key));
  require(v.has_value() && *v >= 0, ErrorCode::malformed_file,
          "report key '" + std::string(key) + "' is not a nonnegative integer");
  return static_cast<std::uint64_t>(*v);
}

std::size_t Report::column(std::string_view name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  throw Error(ErrorCode::malformed_file, "report has no column '" + std::string(name) + "'");
}

std::string Report::format() const {
  std::ostringstream out;
  for (const auto& [k, v] : header) out << k << " = " << v << '\n';
  out << "---\n";
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return out.str();
}

Report Report::parse(std::string_view contents) {
  Report r;
  const auto lines = text::split(contents, '\n');
  std::size_t k = 0;
  for (; k < lines.size() && lines[k] != "---"; ++k) {
    if (lines[k].empty()) continue;
    const auto eq = lines[k].find('=');
    require(eq != std::string_view::npos, ErrorCode::malformed_file,
            "report line " + std::to_string(k + 1) + ": expected key = value");
    r.header.emplace_back(std::string(text::trim(lines[k].substr(0, eq))),
                          std::string(text::trim(lines[k].substr(eq + 1))));
  }
  require(k < lines.size(), ErrorCode::malformed_file, "report has no '---' separator");
  ++k;
  if (k < lines.size()) {
    for (auto c : text::split(lines[k], ',')) r.columns.emplace_back(c);
  }
  for (++k; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    std::vector<std::string> row;
    for (auto c : text::split(lines[k], ',')) row.emplace_back(c);
    require(row.size() == r.columns.size(), ErrorCode::malformed_file,
            "report line " + std::to_string(k + 1) + " has " + std::to_string(row.size()) + " fields, expected " +
                std::to_string(r.columns.size()));
    r.rows.push_back(std::move(row));
  }
  return r;
}

void Report::save(const std::string& path) const { text::write_file_atomic(path, format()); }

Report Report::load(const std::string& path) { return parse(text::read_file(path)); }

std::string hex_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pairstab
