#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "phasesim/dynamics.hpp"
#include "phasesim/scenario.hpp"

using namespace phasesim;

int main(int argc, char** argv) {
    CLI::App app{"phase-space density transport and measurement statistics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool verbose = false;

    const std::pair<const char*, const char*> subcommands[] = {
        {"evolve", "transport the phase-space density on a grid"},
        {"moments", "closure moments against the point trajectory"},
        {"ensemble", "Monte Carlo particle moments with standard errors"},
        {"measure", "quantized readings, estimates, and reconstruction"},
        {"converge", "interval-probability convergence experiment"},
        {"compose", "reconstruct a state from readings, then evolve it"},
        {"validate", "parse and validate a config without running"},
    };
    for (const auto& [name, description] : subcommands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config,-c", config_path, "scenario config file")->required();
        sub->add_option("--output-dir,-o", output_dir, "override the config output_dir");
        sub->add_option("--seed,-s", seed, "override the config seed");
        sub->add_flag("--verbose,-v", verbose, "list artifacts and diagnostics");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    try {
        ScenarioConfig cfg = load_config(config_path);
        if (sub->count("--output-dir") > 0) cfg.output_dir = output_dir;
        if (sub->count("--seed") > 0) cfg.seed = seed;

        if (name == "validate") {
            std::cout << "config ok: kind = " << to_string(cfg.kind) << "\n";
            return 0;
        }
        if (to_string(cfg.kind) != name) {
            throw ConfigError("config kind is '" + to_string(cfg.kind) +
                              "' but the subcommand is '" + name + "'");
        }
        if (cfg.kind != ScenarioKind::Measure && cfg.kind != ScenarioKind::Converge) {
            const Hamiltonian h(cfg.mass, Potential(cfg.potential));
            if (const auto warning = step_size_warning({cfg.dt, cfg.scheme}, h)) {
                std::cerr << "warning: " << *warning << "\n";
            }
        }

        const RunReport report = run_scenario(cfg);
        if (verbose) {
            for (const ArtifactRecord& a : report.artifacts) {
                std::cout << a.path.string() << "  (" << a.role << ")\n";
            }
            std::cout << "final raw mass " << report.final_mass << ", max residual "
                      << report.max_residual << "\n";
        }
        std::cout << "wrote " << report.artifacts.size() << " artifacts to "
                  << cfg.output_dir << " in " << report.wall_seconds << " s\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
