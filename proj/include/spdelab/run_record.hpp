#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace spdelab {

inline constexpr const char* kArtifactVersion = "spdelab 0.1.0";

// Reproducible experiment result: identical (config, seed) reproduce every
// numeric field bitwise except wall_time_sec.
struct RunRecord {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string artifact_version = kArtifactVersion;
  std::string status = "pass";  // pass | fail | floor | inconclusive
  double wall_time_sec = 0.0;
  nlohmann::ordered_json payload;

  nlohmann::ordered_json to_json(bool include_wall_time = true) const;
  // serialized numeric content without timing, for determinism comparisons
  std::string numeric_fingerprint() const;
};

// append one record as a JSON line to <dir>/<experiment>.jsonl
void append_jsonl(const RunRecord& record, const std::string& dir);

// exit-code contract: 0 = pass, 2 = fail, 3 = inconclusive/floor
int exit_code_for(const RunRecord& record);

}  // namespace spdelab
