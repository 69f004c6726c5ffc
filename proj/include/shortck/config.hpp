#pragma once

// Strict INI-style run configuration. Sections are limited to [run],
// [sequence], [grid] and [params]; '#' starts a comment; every malformed
// line, duplicate key, unknown key or type mismatch is reported with its
// line number so configs fail loudly instead of half-applying.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shortck/util.hpp"

namespace shortck {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct IniFile {
  // section -> key -> entry; sections and keys stay sorted for stable echo.
  std::map<std::string, std::map<std::string, ConfigEntry>> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool valid_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace detail

inline IniFile parse_ini(const std::string& text) {
  static const std::set<std::string> kSections = {"run", "sequence", "grid", "params"};
  IniFile file;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(strprintf("line %d: unterminated section header", line_no));
      std::string name = detail::trim(line.substr(1, line.size() - 2));
      if (!kSections.count(name))
        throw ConfigError(strprintf("line %d: unknown section [%s]", line_no, name.c_str()));
      section = name;
      file.sections[section];  // present even if empty
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(strprintf("line %d: expected 'key = value'", line_no));
    if (section.empty())
      throw ConfigError(strprintf("line %d: key outside of any section", line_no));
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(strprintf("line %d: empty key", line_no));
    for (char c : key)
      if (!detail::valid_key_char(c))
        throw ConfigError(strprintf("line %d: invalid key '%s'", line_no, key.c_str()));
    auto& sect = file.sections[section];
    auto it = sect.find(key);
    if (it != sect.end())
      throw ConfigError(strprintf("line %d: duplicate key '%s' in [%s] (first defined at line %d)",
                                  line_no, key.c_str(), section.c_str(), it->second.line));
    sect.emplace(key, ConfigEntry{value, line_no});
  }
  return file;
}

// Typed accessor over a parsed file. Every read is recorded (defaults
// included) so the run manifest can echo the fully resolved configuration,
// and finish() rejects keys nothing consumed.
class ConfigReader {
 public:
  explicit ConfigReader(IniFile file) : file_(std::move(file)) {}

  bool has(const std::string& section, const std::string& key) const {
    auto s = file_.sections.find(section);
    return s != file_.sections.end() && s->second.count(key) > 0;
  }

  std::string require_string(const std::string& section, const std::string& key) {
    const ConfigEntry& e = require_entry(section, key);
    note(section, key, e.value);
    return e.value;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    if (!has(section, key)) {
      note(section, key, fallback);
      return fallback;
    }
    return require_string(section, key);
  }

  double require_double(const std::string& section, const std::string& key) {
    return parse_double(section, key, require_entry(section, key));
  }

  double get_double(const std::string& section, const std::string& key, double fallback) {
    if (!has(section, key)) {
      note(section, key, fmt_double(fallback));
      return fallback;
    }
    return require_double(section, key);
  }

  long long require_int(const std::string& section, const std::string& key) {
    return parse_int(section, key, require_entry(section, key));
  }

  long long get_int(const std::string& section, const std::string& key, long long fallback) {
    if (!has(section, key)) {
      note(section, key, std::to_string(fallback));
      return fallback;
    }
    return require_int(section, key);
  }

  uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) {
    if (!has(section, key)) {
      note(section, key, std::to_string(fallback));
      return fallback;
    }
    const ConfigEntry& e = require_entry(section, key);
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (errno != 0 || end == e.value.c_str() || *end != '\0' || e.value.front() == '-')
      throw ConfigError(strprintf("line %d: value for '%s' must be an unsigned integer", e.line,
                                  key.c_str()));
    note(section, key, e.value);
    return static_cast<uint64_t>(v);
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) {
      note(section, key, fallback ? "true" : "false");
      return fallback;
    }
    const ConfigEntry& e = require_entry(section, key);
    bool v;
    if (e.value == "true" || e.value == "1" || e.value == "yes")
      v = true;
    else if (e.value == "false" || e.value == "0" || e.value == "no")
      v = false;
    else
      throw ConfigError(
          strprintf("line %d: value for '%s' must be a boolean", e.line, key.c_str()));
    note(section, key, v ? "true" : "false");
    return v;
  }

  // Comma-separated list of reals, e.g. "0.5, 0.25, 0.125".
  std::vector<double> require_double_list(const std::string& section, const std::string& key) {
    const ConfigEntry& e = require_entry(section, key);
    std::vector<double> out;
    for (const std::string& piece : split_list(section, key, e))
      out.push_back(parse_double(section, key, ConfigEntry{piece, e.line}, false));
    note(section, key, e.value);
    return out;
  }

  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      const std::vector<double>& fallback) {
    if (!has(section, key)) {
      std::string joined;
      for (size_t i = 0; i < fallback.size(); ++i) {
        if (i) joined += ",";
        joined += fmt_double(fallback[i]);
      }
      note(section, key, joined);
      return fallback;
    }
    return require_double_list(section, key);
  }

  // Comma-separated list of integers, e.g. "1, 3, 2".
  std::vector<long long> require_int_list(const std::string& section, const std::string& key) {
    const ConfigEntry& e = require_entry(section, key);
    std::vector<long long> out;
    for (const std::string& piece : split_list(section, key, e))
      out.push_back(parse_int(section, key, ConfigEntry{piece, e.line}, false));
    note(section, key, e.value);
    return out;
  }

  // Errors on every key that no reader consumed: strict parsing is what
  // keeps a typo from silently running with defaults.
  void finish() const {
    for (const auto& [section, keys] : file_.sections)
      for (const auto& [key, entry] : keys)
        if (!consumed_.count({section, key}))
          throw ConfigError(strprintf("line %d: unknown key '%s' in [%s]", entry.line, key.c_str(),
                                      section.c_str()));
  }

  // Fully resolved values (defaults filled in), for the manifest echo.
  const std::map<std::string, std::map<std::string, std::string>>& echo() const { return echo_; }

  // Records a value resolved outside the file (a command-line override) so
  // the echoed configuration matches what the run actually used.
  void override_value(const std::string& section, const std::string& key,
                      const std::string& value) {
    note(section, key, value);
  }

 private:
  const ConfigEntry& require_entry(const std::string& section, const std::string& key) {
    auto s = file_.sections.find(section);
    if (s == file_.sections.end() || !s->second.count(key))
      throw ConfigError(
          strprintf("missing required key '%s' in [%s]", key.c_str(), section.c_str()));
    consumed_.insert({section, key});
    return s->second.at(key);
  }

  double parse_double(const std::string& section, const std::string& key, const ConfigEntry& e,
                      bool record = true) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(e.value.c_str(), &end);
    if (errno != 0 || end == e.value.c_str() || *end != '\0')
      throw ConfigError(strprintf("line %d: value for '%s' must be a number", e.line, key.c_str()));
    if (record) note(section, key, e.value);
    return v;
  }

  long long parse_int(const std::string& section, const std::string& key, const ConfigEntry& e,
                      bool record = true) {
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(e.value.c_str(), &end, 10);
    if (errno != 0 || end == e.value.c_str() || *end != '\0')
      throw ConfigError(
          strprintf("line %d: value for '%s' must be an integer", e.line, key.c_str()));
    if (record) note(section, key, e.value);
    return v;
  }

  std::vector<std::string> split_list(const std::string& section, const std::string& key,
                                      const ConfigEntry& e) {
    (void)section;
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(e.value);
    while (std::getline(ss, cur, ',')) {
      cur = detail::trim(cur);
      if (cur.empty())
        throw ConfigError(
            strprintf("line %d: empty element in list '%s'", e.line, key.c_str()));
      out.push_back(cur);
    }
    if (out.empty())
      throw ConfigError(strprintf("line %d: empty list for '%s'", e.line, key.c_str()));
    return out;
  }

  void note(const std::string& section, const std::string& key, const std::string& value) {
    consumed_.insert({section, key});
    echo_[section][key] = value;
  }

  IniFile file_;
  std::set<std::pair<std::string, std::string>> consumed_;
  std::map<std::string, std::map<std::string, std::string>> echo_;
};

}  // namespace shortck
