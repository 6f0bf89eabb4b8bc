#include "pace/kvconfig.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pace/csv.hpp"

namespace pace {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

} // namespace

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("KvConfig: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("KvConfig: missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("KvConfig: empty key on line " + std::to_string(lineno));
    if (cfg.entries_.count(key))
      throw std::runtime_error("KvConfig: duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KvConfig::fetch(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::runtime_error("KvConfig: missing required key '" + key + "'");
  consumed_[key] = true;
  return it->second;
}

std::string KvConfig::get_string(const std::string& key) const { return fetch(key); }

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? fetch(key) : fallback;
}

double KvConfig::get_double(const std::string& key) const {
  const std::string& v = fetch(key);
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size())
    throw std::runtime_error("KvConfig: key '" + key + "' is not a number: " + v);
  return x;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvConfig::get_int(const std::string& key) const {
  const std::string& v = fetch(key);
  std::size_t pos = 0;
  const long long x = std::stoll(v, &pos);
  if (pos != v.size())
    throw std::runtime_error("KvConfig: key '" + key + "' is not an integer: " + v);
  return x;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = fetch(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("KvConfig: key '" + key + "' is not a boolean: " + v);
}

std::vector<double> KvConfig::get_doubles(const std::string& key) const {
  const std::string v = fetch(key);
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty())
    throw std::runtime_error("KvConfig: key '" + key + "' holds no values");
  return out;
}

std::vector<double> KvConfig::get_doubles(const std::string& key,
                                          const std::vector<double>& fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void KvConfig::require_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw std::runtime_error("KvConfig: unknown keys: " + unknown);
}

std::string KvConfig::digest() const {
  std::string blob;
  for (const auto& [key, value] : entries_) blob += key + "=" + value + "\n";
  return fnv1a_hex(blob);
}

} // namespace pace
