#pragma once

#include <map>
#include <string>
#include <vector>

#include "pace/common.hpp"

namespace pace {

/// Flat key = value configuration file. Lines are `key = value`, blank lines
/// and `#` comments are skipped. Values are scalars or comma-separated lists.
/// Lookups go through typed getters; consumers call `require_consumed` at the
/// end so unknown keys are rejected rather than silently ignored.
class KvConfig {
public:
  KvConfig() = default;

  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Throws listing every key that was never read.
  void require_consumed() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Stable digest of the parsed content (order-independent).
  std::string digest() const;

private:
  const std::string& fetch(const std::string& key) const;
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, bool> consumed_;
};

} // namespace pace
