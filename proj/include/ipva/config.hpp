#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ipva {

// Flat `key = value` configuration. Blank lines and `#` comments are
// ignored; later keys override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text,
                              const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma separated list of numbers, or `a:b` for an inclusive integer range.
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  // Keys that were never read; lets callers reject typos.
  std::vector<std::string> unused_keys() const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }
  std::string serialize() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> touched_;
  std::string origin_ = "<config>";
};

}  // namespace ipva
