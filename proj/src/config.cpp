#include "config.hpp"

#include <fstream>

#include "csv.hpp"
#include "errors.hpp"

namespace nowcast {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("bad config line " + std::to_string(lineno) + " in " + path);
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw InputError("empty config key");
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw InputError("missing required config key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_int(it->second, "config key '" + key + "'");
}

long long KeyValueConfig::require_int(const std::string& key) const {
  return parse_int(get_string(key), "config key '" + key + "'");
}

double KeyValueConfig::get_real(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_real(it->second, "config key '" + key + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("invalid boolean '" + v + "' for config key '" + key + "'");
}

std::vector<double> KeyValueConfig::get_real_list(const std::string& key) const {
  std::vector<double> out;
  auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  for (const auto& field : split_csv_line(it->second)) {
    out.push_back(parse_real(field, "config key '" + key + "'"));
  }
  return out;
}

std::string KeyValueConfig::canonical_text() const {
  std::string text;
  for (const auto& [k, v] : entries_) {
    text += k;
    text += '=';
    text += v;
    text += '\n';
  }
  return text;
}

std::uint64_t KeyValueConfig::hash() const { return fnv1a64(canonical_text()); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace nowcast
