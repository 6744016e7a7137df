#include "sarp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <cstdio>

namespace sarp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (cfg.entries_.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    cfg.entries_[key] = Entry{value, lineno};
  }
  return cfg;
}

const Config::Entry* Config::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Config::fail(const std::string& key, const std::string& msg) const {
  const auto it = entries_.find(key);
  const std::string loc =
      it == entries_.end()
          ? origin_
          : origin_ + ":" + std::to_string(it->second.line);
  throw ConfigError(loc + ": field '" + key + "': " + msg);
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const Entry* e = find(key);
  const std::string v = e ? e->value : fallback;
  resolved_[key] = v;
  return v;
}

std::string Config::require_string(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) fail(key, "required field is missing");
  resolved_[key] = e->value;
  return e->value;
}

double Config::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  double v = fallback;
  if (e) {
    char* end = nullptr;
    v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0')
      fail(key, "expected a number, got '" + e->value + "'");
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  resolved_[key] = buf;
  return v;
}

double Config::require_double(const std::string& key) const {
  if (!has(key)) fail(key, "required field is missing");
  return get_double(key, 0.0);
}

long Config::get_long(const std::string& key, long fallback) const {
  const Entry* e = find(key);
  long v = fallback;
  if (e) {
    char* end = nullptr;
    v = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0')
      fail(key, "expected an integer, got '" + e->value + "'");
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  bool r = fallback;
  if (e) {
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
      r = true;
    else if (v == "false" || v == "0" || v == "no" || v == "off")
      r = false;
    else
      fail(key, "expected a boolean, got '" + e->value + "'");
  }
  resolved_[key] = r ? "true" : "false";
  return r;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{value, 0};
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::entries_sorted()
    const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.emplace_back(k, v.value);
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::resolved_sorted()
    const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(resolved_.size());
  for (const auto& [k, v] : resolved_) out.emplace_back(k, v);
  return out;
}

int Config::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

}  // namespace sarp
