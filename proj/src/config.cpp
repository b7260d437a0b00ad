#include "ric/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "ric/csvio.hpp"

namespace ric {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

void RunConfig::apply_override(const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value, got '" +
                      key_equals_value + "'");
  kv_[trim(key_equals_value.substr(0, eq))] =
      trim(key_equals_value.substr(eq + 1));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a real number, got '" + v +
                      "'");
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long RunConfig::get_long(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v +
                      "'");
  }
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key +
                      "': expected an unsigned integer, got '" + v + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

void RunConfig::require_known(const std::set<std::string>& known) const {
  std::string bad;
  for (const auto& [k, v] : kv_) {
    if (!known.count(k)) bad += (bad.empty() ? "" : ", ") + k;
  }
  if (!bad.empty())
    throw ConfigError("unknown configuration key(s): " + bad);
}

std::string RunConfig::canonical() const {
  std::string out;
  // output_dir names the destination, not the computation: identical runs
  // written to different places must stamp the same hash.
  for (const auto& [k, v] : kv_)
    if (k != "output_dir") out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::config_hash() const { return hex64(fnv1a64(canonical())); }

}  // namespace ric
