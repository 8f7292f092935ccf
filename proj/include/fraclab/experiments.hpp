#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/config.hpp"
#include "fraclab/kato.hpp"
#include "fraclab/report.hpp"

namespace fraclab {

// One acceptance criterion and the single command that runs it.
struct ExperimentInfo {
    std::string id;      // AC1 .. AC10
    Command command;
    std::string suite;
    std::string summary;
    double runtime_seconds = 0.0; // measured on one core, Release build
    std::string invocation() const; // "kernel --suite oracles"
};

const std::vector<ExperimentInfo>& experiment_table();
const ExperimentInfo& find_experiment(const std::string& id);
// Fixed-width text table: id, command line, expected runtime, summary.
std::string list_experiments();

// Runs cfg. With a suite the acceptance settings are pinned and only seed is read from cfg;
// without one the run is parametric in the remaining fields. Command::all runs every criterion
// and merges their checks, prefixed by id.
Report run_experiment(const ExperimentConfig& cfg);
Report run_criterion(const std::string& id, std::uint64_t seed = ExperimentConfig{}.seed);

// C1 from the profile sweep (non-integer alpha only) and C2 from the resolvent sweep.
KatoProfile estimate_profile(const FracParams& p);

} // namespace fraclab
