#pragma once

// Plain-text `key = value` files with `#` comments, used for experiment
// configs and the calibration table.

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace fts::config {

class KeyValues {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Raw value; throws ConfigError when missing.
  const std::string& at(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers, or `lo:hi:step` for an inclusive range.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(std::istream& in, const std::string& source_name = "<stream>");
KeyValues load_key_values(const std::filesystem::path& path);

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);
std::vector<double> parse_list(const std::string& text, const std::string& what);

}  // namespace fts::config
