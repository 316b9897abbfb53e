#pragma once

// Plain key = value configuration files. '#' starts a comment; blank lines are ignored; keys are
// unique. Lists are comma separated. Angles accept "pi/5", "3*pi/8" or plain numbers.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scrambler/errors.hpp"
#include "scrambler/types.hpp"

namespace scrambler {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ValidationError("config: " + key + " is not a number: '" + v + "'");
  }
  if (used != v.size()) throw ValidationError("config: " + key + " is not a number: '" + v + "'");
  return x;
}

}  // namespace detail

/// "pi", "pi/5", "3*pi/8", "0.785".
inline double parse_angle(const std::string& key, std::string v) {
  v = detail::trim(v);
  const auto p = v.find("pi");
  if (p == std::string::npos) return detail::parse_double(key, v);
  double num = 1, den = 1;
  std::string pre = detail::trim(v.substr(0, p)), post = detail::trim(v.substr(p + 2));
  if (!pre.empty()) {
    if (pre.back() != '*') throw ValidationError("config: bad angle '" + v + "' for " + key);
    num = detail::parse_double(key, detail::trim(pre.substr(0, pre.size() - 1)));
  }
  if (!post.empty()) {
    if (post.front() != '/') throw ValidationError("config: bad angle '" + v + "' for " + key);
    den = detail::parse_double(key, detail::trim(post.substr(1)));
    if (den == 0) throw ValidationError("config: zero denominator in " + key);
  }
  return num * kPi / den;
}

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (c.values_.count(key)) throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
      c.values_[key] = value;
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("config: cannot open " + path.string());
    return parse(is, path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& def) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? def : detail::parse_double(key, it->second);
  }

  std::int64_t get_int(const std::string& key, std::int64_t def) const {
    const double x = get_double(key, static_cast<double>(def));
    if (x != static_cast<double>(static_cast<std::int64_t>(x))) throw ValidationError("config: " + key + " must be an integer");
    return static_cast<std::int64_t>(x);
  }

  bool get_bool(const std::string& key, bool def) const {
    const std::string v = get_string(key, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config: " + key + " must be a boolean");
  }

  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& def) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::vector<std::string> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  /// Keys present in the file but never read.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace scrambler
