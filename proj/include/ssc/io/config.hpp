#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssc/core/error.hpp"

namespace ssc {

/// Plain-text key=value settings. '#' starts a comment; later assignments
/// replace earlier ones, so command-line flags applied after a file win.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "config") {
    Config c;
    std::string line;
    for (int n = 1; std::getline(is, line); ++n) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw DataError(source + ":" + std::to_string(n) + ": expected key=value, got '" + line + "'");
      }
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw DataError(source + ":" + std::to_string(n) + ": empty key");
      c.set(key, trim(line.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config " + path);
    return parse(is, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void merge(const Config& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  std::string str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw DataError("missing setting '" + key + "'");
    return it->second;
  }

  double real(const std::string& key, double fallback) const {
    return has(key) ? to_real(key, str(key)) : fallback;
  }
  double real(const std::string& key) const { return to_real(key, str(key)); }

  long long integer(const std::string& key, long long fallback) const {
    return has(key) ? to_integer(key, str(key)) : fallback;
  }
  long long integer(const std::string& key) const { return to_integer(key, str(key)); }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw DataError("setting '" + key + "': expected true or false, got '" + v + "'");
  }

  /// Comma- or space-separated numbers.
  std::vector<double> reals(const std::string& key, std::vector<double> fallback = {}) const {
    if (!has(key)) return fallback;
    std::string v = str(key);
    for (char& ch : v)
      if (ch == ',') ch = ' ';
    std::istringstream is(v);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_real(key, tok));
    return out;
  }

  /// Keys outside `known` are reported so a misspelt setting is not ignored.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_)
      if (!known.count(k)) throw UsageError("unknown setting '" + k + "'");
  }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : values_) os << k << '=' << v << '\n';
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE) {
      throw DataError("setting '" + key + "': '" + v + "' is not a number");
    }
    return d;
  }

  static long long to_integer(const std::string& key, const std::string& v) {
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE) {
      throw DataError("setting '" + key + "': '" + v + "' is not an integer");
    }
    return i;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace ssc
