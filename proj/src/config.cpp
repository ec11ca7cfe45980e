#include "spdelab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spdelab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
    if (c.entries_.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    c.entries_[key] = val;
  }
  return c;
}

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? dflt : it->second;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw std::invalid_argument("config: missing required key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
  return v;
}

long Config::get_int(const std::string& key, long dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
  return v;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0')
    throw std::invalid_argument("config: key '" + key + "' is not a seed: " + it->second);
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a bool: " + it->second);
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw std::invalid_argument("config: key '" + key + "' has a non-numeric entry: " + tok);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("config: key '" + key + "' is an empty list");
  return out;
}

void Config::validate_keys(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : entries_)
    if (!allowed.count(k))
      throw std::invalid_argument("config: unknown key '" + k + "'");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

std::string Config::hash() const {
  // FNV-1a 64-bit
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace spdelab
