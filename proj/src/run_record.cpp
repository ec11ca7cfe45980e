#include "spdelab/run_record.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace spdelab {

nlohmann::ordered_json RunRecord::to_json(bool include_wall_time) const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["artifact_version"] = artifact_version;
  j["status"] = status;
  if (include_wall_time) j["wall_time_sec"] = wall_time_sec;
  j["payload"] = payload;
  return j;
}

std::string RunRecord::numeric_fingerprint() const { return to_json(false).dump(); }

void append_jsonl(const RunRecord& record, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + record.experiment + ".jsonl";
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("append_jsonl: cannot open " + path);
  out << record.to_json().dump() << "\n";
}

int exit_code_for(const RunRecord& record) {
  if (record.status == "pass") return 0;
  if (record.status == "fail") return 2;
  return 3;
}

}  // namespace spdelab
