#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace spdelab {

// Flat key=value configuration, one key per line, '#' comments. All floats
// are parsed in full double precision. Unknown keys are rejected against the
// per-experiment schema before any run.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  std::string get_string(const std::string& key, const std::string& dflt) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  long get_int(const std::string& key, long dflt) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& dflt) const;

  // error if any present key is not in `allowed` (no silent defaults for misspellings)
  void validate_keys(const std::set<std::string>& allowed) const;

  std::string canonical() const;  // sorted "key = value" lines
  std::string hash() const;       // FNV-1a over canonical text, hex

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace spdelab
