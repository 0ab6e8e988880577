#ifndef PHASESIM_CONFIG_HPP
#define PHASESIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "phasesim/dynamics.hpp"
#include "phasesim/measurement.hpp"

namespace phasesim {

enum class ScenarioKind { Evolve, Moments, Ensemble, Measure, Converge, Compose };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view text);

/// Everything a scenario run needs, in one flat record. Parsed from a
/// sectioned key = value document with a strict schema: unknown sections,
/// unknown keys, and duplicate keys are errors.
struct ScenarioConfig {
    // [scenario]
    ScenarioKind kind = ScenarioKind::Evolve;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    // [state]
    double q0 = 0.0;
    double p0 = 0.0;
    double a = 1.0;
    double b = 1.0;
    // [hamiltonian]
    double mass = 1.0;
    std::vector<double> potential{0.0};  // coefficients c0 c1 c2 ...
    // [time]
    double horizon = 1.0;
    double dt = 1e-3;
    // [grid]
    double q_min = -12.0;
    double q_max = 12.0;
    double p_min = -12.0;
    double p_max = 12.0;
    int nq = 512;
    int np = 512;
    // [solver]
    IntegratorScheme scheme = IntegratorScheme::Leapfrog;
    Interpolation interpolation = Interpolation::CubicClamped;
    bool renormalize = true;
    double mass_leak_tolerance = 0.01;
    // [evolve]
    std::vector<double> snapshot_times;  // snapped to the step lattice
    long long record_every = 0;          // steps between CSV rows; 0 = auto
    // [ensemble]
    long long particles = 100000;
    int shards = 0;
    std::vector<double> report_times;  // empty = report at the horizon
    // [measurement]
    RationalStep step{1, 10};
    double sigma_syst = 0.0;
    double sigma_rand = 1.0;
    bool offset_random = false;  // draw the systematic offset from its model
    double offset = 0.0;         // ignored when offset_random
    double x_true = 0.0;
    long long samples = 10000;
    // [converge]
    std::vector<long long> n_schedule{100, 1000, 10000, 100000};
    long long trials = 16;
    bool has_interval = false;
    double interval_a = 0.0;
    double interval_b = 0.0;
    // [compose]
    bool has_momentum_model = false;
    double momentum_mean = 0.0;
    double momentum_var = 0.0;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError with a line reference for syntax, schema, and value
/// problems; defaults fill everything not given.
ScenarioConfig parse_config(std::string_view text);

/// Reads the file (IoError) and parses it.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical document: parse_config(render_config(cfg)) == cfg.
std::string render_config(const ScenarioConfig& cfg);

}  // namespace phasesim

#endif
