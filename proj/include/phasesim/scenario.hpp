#ifndef PHASESIM_SCENARIO_HPP
#define PHASESIM_SCENARIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "phasesim/config.hpp"

namespace phasesim {

struct ArtifactRecord {
    std::filesystem::path path;
    std::string role;
};

struct RunReport {
    std::vector<ArtifactRecord> artifacts;
    double wall_seconds = 0.0;
    double final_mass = 1.0;    // last raw grid mass; 1 when no grid solver ran
    double max_residual = 0.0;  // worst invariant deviation seen during the run

    bool has_artifact(const std::string& filename) const;
};

/// Execute the scenario the config describes and write its artifacts under
/// cfg.output_dir. Output bytes depend only on (cfg, cfg.seed). On success
/// every listed artifact exists and is non-empty.
RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace phasesim

#endif
