#include "phasesim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "phasesim/csv.hpp"
#include "phasesim/moments.hpp"
#include "phasesim/plot.hpp"

namespace phasesim {

namespace fs = std::filesystem;

namespace {

GaussianState make_state(const ScenarioConfig& cfg) {
    return GaussianState(cfg.q0, cfg.p0, cfg.a, cfg.b);
}

Hamiltonian make_hamiltonian(const ScenarioConfig& cfg) {
    return Hamiltonian(cfg.mass, Potential(cfg.potential));
}

GridSpec make_grid(const ScenarioConfig& cfg) {
    return GridSpec{cfg.q_min, cfg.q_max, cfg.p_min, cfg.p_max, cfg.nq, cfg.np};
}

SolverConfig make_solver_config(const ScenarioConfig& cfg) {
    SolverConfig sc;
    sc.integrator.dt = cfg.dt;
    sc.integrator.scheme = cfg.scheme;
    sc.interpolation = cfg.interpolation;
    sc.renormalize_each_step = cfg.renormalize;
    sc.mass_leak_tolerance = cfg.mass_leak_tolerance;
    return sc;
}

MeasurementDevice make_device(const ScenarioConfig& cfg) {
    if (cfg.offset_random) {
        return MeasurementDevice::with_random_offset(cfg.step, cfg.sigma_syst,
                                                     cfg.sigma_rand, cfg.seed);
    }
    return MeasurementDevice(cfg.step, cfg.sigma_syst, cfg.sigma_rand, cfg.offset);
}

void add_artifact(RunReport& report, fs::path path, std::string role) {
    report.artifacts.push_back({std::move(path), std::move(role)});
}

/// Grid run shared by the evolve and compose scenarios.
void evolve_core(const ScenarioConfig& cfg, const GaussianState& s, const fs::path& dir,
                 RunReport& report) {
    const Hamiltonian h = make_hamiltonian(cfg);
    const GridDensity d0 = grid_from_state(s, make_grid(cfg));
    const double initial_mass = d0.total_mass();
    SemiLagrangianSolver solver(d0, h, make_solver_config(cfg));

    const StepPlan plan = make_step_plan(cfg.horizon, cfg.dt);
    const long long final_index = plan.full_steps + (plan.remainder > 0.0 ? 1 : 0);
    long long cadence = cfg.record_every;
    if (cadence <= 0) cadence = std::max<long long>(1, plan.full_steps / 200);

    std::map<long long, double> snapshot_at;  // step index -> requested time
    for (const double ts : cfg.snapshot_times) {
        if (ts > cfg.horizon + 1e-12 * std::max(1.0, cfg.horizon)) {
            throw ConfigError("snapshot time " + format_double(ts) +
                              " lies beyond the horizon");
        }
        long long k = std::llround(ts / cfg.dt);
        if (k > final_index) k = final_index;
        snapshot_at.emplace(k, ts);
    }

    CsvTable table({"t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "mass_raw"});
    const auto record = [&](double raw_mass) {
        const MomentState ms = solver.moments();
        table.add_row({solver.time(), ms.mean_q, ms.mean_p, ms.var_q, ms.var_p, ms.cov_qp,
                       raw_mass});
    };
    long long snapshot_ordinal = 0;
    const auto maybe_snapshot = [&](long long index) {
        const auto it = snapshot_at.find(index);
        if (it == snapshot_at.end()) return;
        const fs::path path =
            dir / ("snapshot_" + std::to_string(snapshot_ordinal) + ".csv");
        write_density_csv(solver.density(), path);
        add_artifact(report, path,
                     "density snapshot near t = " + format_double(it->second));
        ++snapshot_ordinal;
    };

    record(initial_mass);
    maybe_snapshot(0);
    for (long long k = 1; k <= plan.full_steps; ++k) {
        solver.advance_steps(1);
        if (k % cadence == 0 || k == plan.full_steps) {
            record(solver.diagnostics().back().raw_mass);
        }
        maybe_snapshot(k);
    }
    if (plan.remainder > 0.0) {
        solver.advance_by(plan.remainder);
        record(solver.diagnostics().back().raw_mass);
        maybe_snapshot(final_index);
    }

    report.final_mass = solver.diagnostics().empty()
                            ? initial_mass
                            : solver.diagnostics().back().raw_mass;
    double worst = std::abs(initial_mass - 1.0);
    for (const StepDiagnostic& d : solver.diagnostics()) {
        worst = std::max(worst, std::abs(d.raw_mass - 1.0));
    }
    report.max_residual = std::max(report.max_residual, worst);

    const fs::path csv_path = dir / "moments.csv";
    table.write(csv_path);
    add_artifact(report, csv_path, "moment time series");
    const fs::path svg_path = dir / "moments.svg";
    emit_plot(table, {"grid moments", {{"t", "mean_q", ""}, {"t", "var_q", ""}}}, svg_path);
    add_artifact(report, svg_path, "moment plot");
}

void run_moments(const ScenarioConfig& cfg, const fs::path& dir, RunReport& report) {
    const Hamiltonian h = make_hamiltonian(cfg);
    const GaussianState s = make_state(cfg);
    const MomentTrajectory traj = evolve_moments(s.moments(), h, cfg.horizon, cfg.dt);
    const NewtonTrajectory newt =
        newton_trajectory({s.q0(), s.p0()}, h, cfg.horizon, cfg.dt);

    const long long cadence = cfg.record_every > 0 ? cfg.record_every : 1;
    CsvTable table({"t", "mean_q", "q_newton", "correction"});
    double worst_defect = 0.0;
    for (size_t k = 0; k < traj.size(); ++k) {
        worst_defect = std::max(worst_defect, traj[k].state.covariance_defect());
        const bool keep = k % static_cast<size_t>(cadence) == 0 || k + 1 == traj.size();
        if (!keep) continue;
        const double mean_q = traj[k].state.mean_q;
        const double q_newton = newt[k].z.q;
        table.add_row({traj[k].t, mean_q, q_newton, mean_q - q_newton});
    }
    report.max_residual = std::max(report.max_residual, std::max(0.0, worst_defect));

    const fs::path csv_path = dir / "correction.csv";
    table.write(csv_path);
    add_artifact(report, csv_path, "closure mean vs point trajectory");
    const fs::path svg_path = dir / "correction.svg";
    emit_plot(table, {"mean-trajectory correction", {{"t", "correction", ""}}}, svg_path);
    add_artifact(report, svg_path, "correction plot");
}

void run_ensemble(const ScenarioConfig& cfg, const fs::path& dir, RunReport& report) {
    const Hamiltonian h = make_hamiltonian(cfg);
    const GaussianState s = make_state(cfg);
    std::vector<double> times = cfg.report_times;
    if (times.empty()) times.push_back(cfg.horizon);
    EnsembleConfig ec;
    ec.integrator.dt = cfg.dt;
    ec.integrator.scheme = cfg.scheme;
    ec.shards = cfg.shards;
    const std::vector<EnsembleResult> results =
        ensemble_evolve_at(s, h, times, cfg.particles, cfg.seed, ec);

    CsvTable table({"t", "mean_q", "mean_p", "var_q", "var_p", "cov_qp", "se_mean_q",
                    "se_mean_p", "se_var_q", "se_var_p", "se_cov_qp", "n"});
    table.mark_integer("n");
    for (const EnsembleResult& r : results) {
        table.add_row({r.t, r.moments.mean_q, r.moments.mean_p, r.moments.var_q,
                       r.moments.var_p, r.moments.cov_qp, r.standard_errors.mean_q,
                       r.standard_errors.mean_p, r.standard_errors.var_q,
                       r.standard_errors.var_p, r.standard_errors.cov_qp,
                       static_cast<double>(r.particle_count)});
    }
    const fs::path csv_path = dir / "ensemble.csv";
    table.write(csv_path);
    add_artifact(report, csv_path, "ensemble moment estimates");
    const fs::path svg_path = dir / "ensemble.svg";
    emit_plot(table, {"ensemble moments", {{"t", "mean_q", ""}, {"t", "var_q", ""}}},
              svg_path);
    add_artifact(report, svg_path, "ensemble plot");
}

/// Measurement stage shared by the measure and compose scenarios.
EstimateResult measure_core(const ScenarioConfig& cfg, const fs::path& dir,
                            RunReport& report, bool write_samples) {
    const MeasurementDevice dev = make_device(cfg);
    const SampleSet samples = sample_measurements(dev, cfg.x_true, cfg.samples, cfg.seed);
    const EstimateResult est = estimate(samples, dev.sigma_syst());

    if (write_samples) {
        CsvTable sample_table({"index", "value"});
        sample_table.mark_integer("index");
        for (size_t i = 0; i < samples.indices.size(); ++i) {
            sample_table.add_row({static_cast<double>(samples.indices[i]),
                                  samples.value(i)});
        }
        const fs::path samples_path = dir / "samples.csv";
        sample_table.write(samples_path);
        add_artifact(report, samples_path, "quantized readings");

        const DiscreteDistribution freq = empirical_cell_frequencies(samples);
        CsvTable freq_table({"index", "frequency"});
        freq_table.mark_integer("index");
        for (const auto& [index, frequency] : freq.probs) {
            freq_table.add_row({static_cast<double>(index), frequency});
        }
        const fs::path freq_path = dir / "frequencies.csv";
        freq_table.write(freq_path);
        add_artifact(report, freq_path, "empirical cell frequencies");

        if (dev.sigma_rand() > 0.0) {
            const double model_mean = cfg.x_true + dev.systematic_offset();
            const ReconstructionDensity model(model_mean,
                                              dev.sigma_rand() * dev.sigma_rand(),
                                              DensityKind::Model);
            const long long lo = quantize(model_mean - 8.5 * dev.sigma_rand(), dev.step());
            const long long hi = quantize(model_mean + 8.5 * dev.sigma_rand(), dev.step());
            const DiscreteDistribution cells =
                cell_probabilities(model, dev.step(), lo, hi);
            CsvTable cell_table({"index", "probability"});
            cell_table.mark_integer("index");
            for (const auto& [index, probability] : cells.probs) {
                cell_table.add_row({static_cast<double>(index), probability});
            }
            const fs::path cells_path = dir / "model_cells.csv";
            cell_table.write(cells_path);
            add_artifact(report, cells_path, "model cell probabilities");
            report.max_residual =
                std::max(report.max_residual, std::abs(1.0 - cells.total()));
        }
    }

    CsvTable est_table({"n", "mean_est", "s2_rand", "s2_total", "sigma_syst", "offset"});
    est_table.mark_integer("n");
    est_table.add_row({static_cast<double>(est.n), est.mean_est, est.s2_rand, est.s2_total,
                       dev.sigma_syst(), dev.systematic_offset()});
    const fs::path est_path = dir / "estimate.csv";
    est_table.write(est_path);
    add_artifact(report, est_path, "sample statistics");

    std::string reconstruction = "kind,mean,variance\n";
    reconstruction += "finite_n," + format_double(est.density.mean()) + "," +
                      format_double(est.density.variance()) + "\n";
    if (dev.sigma_syst() > 0.0) {
        const ReconstructionDensity limit = rho_infinity(est.mean_est, dev.sigma_syst());
        reconstruction += "limit," + format_double(limit.mean()) + "," +
                          format_double(limit.variance()) + "\n";
    }
    const fs::path rec_path = dir / "reconstruction.csv";
    write_text_file(rec_path, reconstruction);
    add_artifact(report, rec_path, "reconstruction parameters");
    return est;
}

void run_converge(const ScenarioConfig& cfg, const fs::path& dir, RunReport& report) {
    const MeasurementDevice dev = make_device(cfg);
    const LatticeInterval iv =
        LatticeInterval::from_values(cfg.step, cfg.interval_a, cfg.interval_b);
    const ConvergenceReport rows = convergence_experiment(
        dev, cfg.x_true, cfg.n_schedule, cfg.trials, cfg.seed, iv);

    CsvTable table({"n", "mean_gap", "se_gap", "mean_empirical", "mean_model"});
    table.mark_integer("n");
    for (const ConvergenceRow& row : rows) {
        table.add_row({static_cast<double>(row.n), row.mean_gap, row.se_gap,
                       row.mean_empirical, row.mean_model});
    }
    const fs::path csv_path = dir / "converge.csv";
    table.write(csv_path);
    add_artifact(report, csv_path, "interval-probability gap per sample size");
    const fs::path svg_path = dir / "converge.svg";
    emit_plot(table, {"reconstruction convergence", {{"n", "mean_gap", ""}}}, svg_path);
    add_artifact(report, svg_path, "convergence plot");
    if (!rows.empty()) {
        report.max_residual = std::max(report.max_residual, rows.back().mean_gap);
    }
}

void run_compose(const ScenarioConfig& cfg, const fs::path& dir, RunReport& report) {
    const EstimateResult est = measure_core(cfg, dir, report, false);
    const GaussianState derived(est.mean_est, cfg.momentum_mean,
                                std::sqrt(2.0 * est.s2_total),
                                std::sqrt(2.0 * cfg.momentum_var));

    CsvTable state_table({"q0", "p0", "a", "b"});
    state_table.add_row({derived.q0(), derived.p0(), derived.a(), derived.b()});
    const fs::path state_path = dir / "derived_state.csv";
    state_table.write(state_path);
    add_artifact(report, state_path, "reconstructed initial state");

    evolve_core(cfg, derived, dir, report);
}

}  // namespace

bool RunReport::has_artifact(const std::string& filename) const {
    for (const ArtifactRecord& a : artifacts) {
        if (a.path.filename().string() == filename) return true;
    }
    return false;
}

RunReport run_scenario(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " +
                      ec.message());
    }

    RunReport report;
    switch (cfg.kind) {
        case ScenarioKind::Evolve:
            evolve_core(cfg, make_state(cfg), dir, report);
            break;
        case ScenarioKind::Moments:
            run_moments(cfg, dir, report);
            break;
        case ScenarioKind::Ensemble:
            run_ensemble(cfg, dir, report);
            break;
        case ScenarioKind::Measure:
            measure_core(cfg, dir, report, true);
            break;
        case ScenarioKind::Converge:
            run_converge(cfg, dir, report);
            break;
        case ScenarioKind::Compose:
            run_compose(cfg, dir, report);
            break;
    }

    for (const ArtifactRecord& a : report.artifacts) {
        std::error_code size_ec;
        const auto size = fs::file_size(a.path, size_ec);
        if (size_ec || size == 0) {
            throw IoError("artifact missing or empty: " + a.path.string());
        }
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace phasesim
