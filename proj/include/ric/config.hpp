#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ric/errors.hpp"

namespace ric {

// Flat key=value run configuration. Files hold one key=value per line with
// '#' comments; --set overrides are applied on top. Keys are validated
// against the set a command declares; unknown keys are rejected.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);
  void apply_override(const std::string& key_equals_value);  // "key=value"
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws ConfigError listing any key not in `known`.
  void require_known(const std::set<std::string>& known) const;

  // Canonical "k=v\n" dump, sorted by key; input to the config hash. Skips
  // output_dir so the hash names the computation, not its destination.
  std::string canonical() const;
  std::string config_hash() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace ric
