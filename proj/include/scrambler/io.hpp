#pragma once

// CSV tables and JSON sidecars. Numbers are written with 17 significant digits so that files
// round-trip bit-exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scrambler/errors.hpp"

namespace scrambler {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> r) {
    if (r.size() != columns.size()) throw ShapeError("table row has " + std::to_string(r.size()) + " fields, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(r));
  }

  std::size_t column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw DomainError("table has no column " + name);
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << '\n';
  }
  if (!os) throw Error("write failed: " + path.string());
}

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t p = s.find(',', start);
      out.push_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
      if (p == std::string::npos) break;
      start = p + 1;
    }
    return out;
  };
  if (!std::getline(is, line)) throw DomainError("empty CSV: " + path.string());
  t.columns = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    for (auto& f : split(line)) r.push_back(std::stod(f));
    t.add_row(std::move(r));
  }
  return t;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
}

}  // namespace scrambler
