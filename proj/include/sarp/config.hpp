#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sarp/errors.hpp"

namespace sarp {

// Flat key = value configuration with dotted sections and '#' comments.
// One file describes one experiment.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text,
                             const std::string& origin = "<string>");

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

  // Keys present in the file but never read; used to reject typos.
  std::vector<std::string> unused_keys() const;

  // All entries, sorted by key, for echoing into output headers.
  std::vector<std::pair<std::string, std::string>> entries_sorted() const;

  // Every key consumed so far with its effective value (defaults included),
  // in canonical text form. Echoed into output headers; re-parsing the echo
  // reproduces the run.
  std::vector<std::pair<std::string, std::string>> resolved_sorted() const;

  const std::string& origin() const { return origin_; }
  int line_of(const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::string> resolved_;
  std::string origin_;

  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;
};

}  // namespace sarp
