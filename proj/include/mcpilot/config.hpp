#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mcpilot {

/// Flat `key = value` configuration. Blank lines and `#` comments are
/// ignored; a later assignment of the same key wins.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Whitespace- or comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  /// Keys present in the file that no getter has asked for.
  std::vector<std::string> unused_keys() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> touched_;
};

}  // namespace mcpilot
