#pragma once

#include <string>

#include "spdelab/config.hpp"
#include "spdelab/run_record.hpp"
#include "spdelab/solvers.hpp"

namespace spdelab {

// Experiment campaigns reproducing the quantitative estimates at desk scale.
// Each validates its config keys, runs seeded Monte Carlo with a worker pool,
// persists a RunRecord JSON line plus per-run CSVs, and never throws past a
// valid config: failures land in the record's status field.
RunRecord run_experiment(const Config& config);

RunRecord exp_simulate(const Config& config);
RunRecord exp_theta(const Config& config);
RunRecord exp_lemmas(const Config& config);
RunRecord exp_stability(const Config& config);
RunRecord exp_wongzakai(const Config& config);
RunRecord exp_decay(const Config& config);
RunRecord exp_regularity(const Config& config);
RunRecord exp_splitup(const Config& config);

// resolved output directory: SPDELAB_OUT > output_dir key > "out"
std::string resolve_output_dir(const Config& config);

void write_monitors_csv(const Trajectory& traj, const std::string& path);
void write_snapshot_csv(const TorusField& field, const std::string& path);

}  // namespace spdelab
