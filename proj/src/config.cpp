#include "ftsinv/config.hpp"

#include "ftsinv/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fts::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(what + ": trailing characters in '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected an integer, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(what + ": trailing characters in '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(parse_double(trim(item), what));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
      throw ConfigError(what + ": range must be lo:hi:step with step > 0");
    const auto count = static_cast<long long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(parts[0] + i * parts[2]);
    return out;
  }
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, what));
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

const std::string& KeyValues::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing key: " + key);
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return contains(key) ? at(key) : fallback;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return contains(key) ? parse_double(at(key), key) : fallback;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
  return contains(key) ? parse_int(at(key), key) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  if (!contains(key)) return fallback;
  const auto& v = at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> KeyValues::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  return contains(key) ? parse_list(at(key), key) : fallback;
}

void KeyValues::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : entries_)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown key: " + k);
}

KeyValues parse_key_values(std::istream& in, const std::string& source_name) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    std::ostringstream where;
    where << source_name << ":" << lineno;
    if (eq == std::string::npos) throw ConfigError(where.str() + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where.str() + ": empty key");
    if (kv.contains(key)) throw ConfigError(where.str() + ": duplicate key " + key);
    kv.set(key, value);
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_key_values(in, path.string());
}

}  // namespace fts::config
