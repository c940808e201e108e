#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nowcast {

// Flat key=value run configuration. Files use one `key = value` pair per
// line, '#' starts a comment. Keys are kept sorted so the canonical text
// (and therefore the config hash) is stable.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;  // throws if absent
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  long long require_int(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_real_list(const std::string& key) const;  // comma separated

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Sorted `key=value` lines; input to the config hash.
  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a over canonical_text()

 private:
  std::map<std::string, std::string> entries_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace nowcast
