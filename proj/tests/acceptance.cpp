// Acceptance gate: exercises the full pipeline end to end and prints one
// verdict line per criterion. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "phasesim/config.hpp"
#include "phasesim/csv.hpp"
#include "phasesim/dynamics.hpp"
#include "phasesim/measurement.hpp"
#include "phasesim/moments.hpp"
#include "phasesim/phase_space.hpp"
#include "phasesim/scenario.hpp"

using namespace phasesim;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int number, const Verdict& v) {
    std::printf("criterion %d: %s  %s\n", number, v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- criteria 1 and 2 share one free-motion grid run ----------------------

struct FreeRunResult {
    MomentState grid_moments;
    std::vector<StepDiagnostic> diagnostics;
    double wall = 0.0;
};

FreeRunResult run_free_motion() {
    GaussianState s(0.0, 1.0, 1.0, 1.0);
    Hamiltonian h(1.0, Potential::free_particle());
    GridSpec grid{-12.0, 12.0, -12.0, 12.0, 512, 512};
    const auto start = std::chrono::steady_clock::now();
    SemiLagrangianSolver solver(grid_from_state(s, grid), h, SolverConfig{});
    solver.advance_steps(2000);
    FreeRunResult out;
    out.grid_moments = solver.moments();
    out.diagnostics = solver.diagnostics();
    out.wall = seconds_since(start);
    return out;
}

Verdict criterion1(const FreeRunResult& run) {
    GaussianState s(0.0, 1.0, 1.0, 1.0);
    Hamiltonian h(1.0, Potential::free_particle());

    const double var_err = std::abs(run.grid_moments.var_q - 2.5) / 2.5;
    const double mean_err = std::abs(run.grid_moments.mean_q - 2.0) / 2.0;

    MomentState direct = analytic_gaussian_free(s, 1.0, 2.0);
    MomentState linear = analytic_gaussian_linear(s, h, 2.0);
    double analytic_err = 0.0;
    for (const MomentState& m : {direct, linear}) {
        analytic_err = std::max(analytic_err, std::abs(m.var_q - 2.5));
        analytic_err = std::max(analytic_err, std::abs(m.mean_q - 2.0));
    }

    MomentTrajectory closure = evolve_moments(s.moments(), h, 2.0, 1e-3);
    const MomentState& last = closure.back().state;
    const double closure_err =
        std::max(std::abs(last.var_q - 2.5), std::abs(last.mean_q - 2.0));

    Verdict v;
    v.pass = var_err <= 0.02 && mean_err <= 0.005 && analytic_err <= 1e-8 &&
             closure_err <= 1e-8 && run.wall < 60.0;
    v.detail = fmt(
        "grid var_q(2)=%.6f (err %.3g rel), mean_q(2)=%.6f (err %.3g rel), "
        "analytic err %.2g, closure err %.2g, grid run %.1f s",
        run.grid_moments.var_q, var_err, run.grid_moments.mean_q, mean_err, analytic_err,
        closure_err, run.wall);
    return v;
}

Verdict criterion2(const FreeRunResult& run) {
    double worst = 0.0;
    for (const StepDiagnostic& d : run.diagnostics) {
        worst = std::max(worst, std::abs(d.raw_mass - 1.0));
    }
    Verdict v;
    v.pass = !run.diagnostics.empty() && worst <= 1e-3;
    v.detail = fmt("max |raw mass - 1| = %.3g over %zu steps (limit 1e-3)", worst,
                   run.diagnostics.size());
    return v;
}

// ---- criterion 3: density constant along characteristics ------------------

Verdict criterion3() {
    Hamiltonian h(1.0, Potential::quartic(1.0));
    GaussianState s(0.0, 1.0, 1.0, 1.0);
    const double dt = 1e-3;
    IntegratorConfig icfg{dt, IntegratorScheme::Leapfrog};

    struct Sample {
        PhasePoint z;
        long long steps;
        double t;
    };
    std::mt19937_64 rng(2661);
    std::uniform_real_distribution<double> uz(-1.2, 1.2);
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    std::vector<Sample> samples;
    for (int k = 0; k < 100; ++k) {
        Sample sample;
        sample.z = {uz(rng), uz(rng)};
        sample.steps = std::llround(ut(rng) / dt);
        sample.t = static_cast<double>(sample.steps) * dt;
        samples.push_back(sample);
    }

    double worst_point = 0.0;
    for (const Sample& sample : samples) {
        PhasePoint fwd = hamilton_flow(sample.z, h, sample.t, icfg);
        PhasePoint back = hamilton_flow(fwd, h, -sample.t, icfg);
        worst_point = std::max(worst_point,
                               std::abs(s.density_at(sample.z) - s.density_at(back)));
    }

    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.steps < b.steps; });
    GridSpec grid{-8.0, 8.0, -8.0, 8.0, 512, 512};
    SemiLagrangianSolver solver(grid_from_state(s, grid), h, SolverConfig{});
    long long done = 0;
    double worst_grid = 0.0;
    size_t i = 0;
    while (i < samples.size()) {
        const long long target = samples[i].steps;
        solver.advance_steps(target - done);
        done = target;
        GridDensity field = solver.density();
        for (; i < samples.size() && samples[i].steps == target; ++i) {
            PhasePoint image = hamilton_flow(samples[i].z, h, samples[i].t, icfg);
            const double interpolated =
                interpolate_density(field, image, Interpolation::CubicClamped);
            worst_grid =
                std::max(worst_grid, std::abs(interpolated - s.density_at(samples[i].z)));
        }
    }

    Verdict v;
    v.pass = worst_point <= 1e-10 && worst_grid <= 1e-2;
    v.detail = fmt(
        "round-trip density err %.2g (limit 1e-10), grid-vs-initial err %.2g "
        "(limit 1e-2) over 100 samples",
        worst_point, worst_grid);
    return v;
}

// ---- criterion 4: harmonic recurrence over one period ---------------------

Verdict criterion4() {
    GaussianState s(1.0, 0.0, 1.0, 0.5);
    Hamiltonian h(1.0, Potential::harmonic(1.0));
    const double period = 2.0 * std::numbers::pi;
    GridSpec grid{-8.0, 8.0, -8.0, 8.0, 512, 512};
    GridDensity d0 = grid_from_state(s, grid);

    SemiLagrangianSolver solver(d0, h, SolverConfig{});
    solver.advance_by(period);
    GridDensity dT = solver.density();
    double l1 = 0.0;
    for (int i = 0; i < grid.nq; ++i) {
        for (int j = 0; j < grid.np; ++j) {
            l1 += std::abs(dT.value(i, j) - d0.value(i, j));
        }
    }
    l1 *= grid.dq() * grid.dp();

    MomentState want = s.moments();
    MomentState lin = analytic_gaussian_linear(s, h, period);
    MomentTrajectory closure = evolve_moments(s.moments(), h, period, 1e-3);
    const MomentState& cl = closure.back().state;
    auto moment_gap = [&](const MomentState& m) {
        double gap = std::abs(m.mean_q - want.mean_q);
        gap = std::max(gap, std::abs(m.mean_p - want.mean_p));
        gap = std::max(gap, std::abs(m.var_q - want.var_q));
        gap = std::max(gap, std::abs(m.var_p - want.var_p));
        gap = std::max(gap, std::abs(m.cov_qp - want.cov_qp));
        return gap;
    };
    const double lin_gap = moment_gap(lin);
    const double closure_gap = moment_gap(cl);

    Verdict v;
    v.pass = l1 <= 5e-2 && lin_gap <= 1e-6 && closure_gap <= 1e-6;
    v.detail = fmt(
        "L1 distance after one period %.3g (limit 5e-2), analytic gap %.2g, "
        "closure gap %.2g (limit 1e-6)",
        l1, lin_gap, closure_gap);
    return v;
}

// ---- criterion 5: closure corrections vs a large ensemble -----------------

Verdict criterion5() {
    GaussianState s(1.0, 0.0, 0.2, 0.2);
    Hamiltonian quartic(1.0, Potential::quartic(1.0));
    const double dt = 1e-3;

    CorrectionSeries closure = newton_correction(s, quartic, 1.0, dt);
    const double times[] = {0.25, 0.5, 1.0};
    std::vector<EnsembleResult> ensemble =
        ensemble_evolve_at(s, quartic, times, 1000000, 716,
                           EnsembleConfig{IntegratorConfig{dt, IntegratorScheme::Leapfrog}, 0});

    bool pass = true;
    std::string agreement;
    for (size_t k = 0; k < 3; ++k) {
        const size_t idx = static_cast<size_t>(std::llround(times[k] / dt));
        const CorrectionPoint& pt = closure.at(idx);
        const double ens_correction = ensemble[k].moments.mean_q - pt.q_newton;
        const double diff = std::abs(pt.correction - ens_correction);
        const double limit = 3.0 * ensemble[k].standard_errors.mean_q;
        pass = pass && diff <= limit;
        agreement += fmt("%st=%.2f %.2g<=%.2g", k == 0 ? "" : ", ", times[k], diff, limit);
    }

    Hamiltonian quadratic(1.0, Potential::harmonic(1.0));
    CorrectionSeries flat = newton_correction(s, quadratic, 1.0, dt);
    double worst_flat = 0.0;
    for (const CorrectionPoint& pt : flat) {
        worst_flat = std::max(worst_flat, std::abs(pt.correction));
    }
    pass = pass && worst_flat <= 1e-8;

    Verdict v;
    v.pass = pass;
    v.detail = fmt("|closure - ensemble| vs 3 SE: %s; quadratic correction %.2g (limit 1e-8)",
                   agreement.c_str(), worst_flat);
    return v;
}

// ---- criterion 6: law of large numbers for cell frequencies ---------------

Verdict criterion6() {
    MeasurementDevice dev(RationalStep(1, 10), 0.0, 1.0);
    const double x_true = 0.3;
    const long long n = 100000;
    SampleSet readings = sample_measurements(dev, x_true, n, 41);
    DiscreteDistribution freq = empirical_cell_frequencies(readings);

    ReconstructionDensity model(x_true, 1.0, DensityKind::Model);
    const long long center = quantize(x_true, dev.step());
    DiscreteDistribution cells = cell_probabilities(model, dev.step(), center - 85, center + 85);

    double worst = 0.0;
    for (const auto& [m, p] : cells.probs) {
        const auto it = freq.probs.find(m);
        const double f = it == freq.probs.end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(f - p));
    }
    bool contained = true;
    for (const auto& [m, f] : freq.probs) {
        contained = contained && cells.probs.count(m) == 1;
    }

    Verdict v;
    v.pass = worst <= 5e-3 && contained;
    v.detail = fmt("max cell gap %.3g over %zu cells at n=%lld (limit 5e-3)", worst,
                   cells.probs.size(), n);
    return v;
}

// ---- criterion 7: estimator pipeline ---------------------------------------

Verdict criterion7() {
    MeasurementDevice dev(RationalStep(1, 10), 0.3, 1.0, 0.15);
    const double x_true = 0.4;
    const double target = x_true + dev.systematic_offset();
    const int trials = 1000;
    const long long per_trial = 200;

    std::vector<double> means;
    bool identity = true;
    for (int t = 0; t < trials; ++t) {
        SampleSet readings =
            sample_measurements(dev, x_true, per_trial, 9000 + static_cast<std::uint64_t>(t));
        EstimateResult est = estimate(readings, dev.sigma_syst());
        means.push_back(est.mean_est);
        const double rebuilt =
            est.s2_rand / static_cast<double>(est.n) + dev.sigma_syst() * dev.sigma_syst();
        identity = identity && est.s2_total == rebuilt;
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= trials;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= trials - 1;
    const double se = std::sqrt(var / trials);
    const double mean_gap = std::abs(mean - target);

    MeasurementDevice fine(RationalStep(1, 100), 0.0, 1.0);
    SampleSet readings = sample_measurements(fine, 0.0, 10000, 27);
    EstimateResult est = estimate(readings, 0.0);
    const double sheppard = 1.0 + fine.step().value() * fine.step().value() / 12.0;
    const double sheppard_err = std::abs(est.s2_rand - sheppard) / sheppard;

    Verdict v;
    v.pass = mean_gap <= 4.0 * se && identity && sheppard_err <= 0.05;
    v.detail = fmt(
        "mean estimate gap %.2g vs 4 SE %.2g over %d trials, variance identity %s, "
        "s2_rand within %.2g of sigma^2 + step^2/12 (limit 0.05)",
        mean_gap, 4.0 * se, trials, identity ? "exact" : "BROKEN", sheppard_err);
    return v;
}

// ---- criterion 8: proposition-style convergence ---------------------------

Verdict criterion8() {
    MeasurementDevice dev(RationalStep(1, 20), 0.2, 0.5);
    LatticeInterval iv = LatticeInterval::from_values(dev.step(), -1.975, 1.975);
    ConvergenceReport rows =
        convergence_experiment(dev, 0.0, {100, 1000, 10000, 100000}, 16, 424242, iv);

    bool ordered = true;
    for (size_t k = 0; k + 1 < rows.size(); ++k) {
        const double slack =
            2.0 * std::sqrt(rows[k].se_gap * rows[k].se_gap +
                            rows[k + 1].se_gap * rows[k + 1].se_gap);
        ordered = ordered && rows[k + 1].mean_gap <= rows[k].mean_gap + slack;
    }
    const double final_gap = rows.back().mean_gap;

    std::string trail;
    for (const ConvergenceRow& row : rows) {
        trail += fmt("%s%lld:%.2g", trail.empty() ? "" : " -> ", row.n, row.mean_gap);
    }

    Verdict v;
    v.pass = final_gap <= 0.01 && ordered;
    v.detail = fmt("gap %s (final limit 0.01), non-increasing within error bars: %s",
                   trail.c_str(), ordered ? "yes" : "NO");
    return v;
}

// ---- criterion 9: scenario determinism ------------------------------------

std::map<std::string, std::string> run_and_collect_csv(const ScenarioConfig& cfg) {
    fs::remove_all(cfg.output_dir);
    RunReport report = run_scenario(cfg);
    std::map<std::string, std::string> bytes;
    for (const ArtifactRecord& artifact : report.artifacts) {
        if (artifact.path.extension() != ".csv") continue;
        std::ifstream in(artifact.path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        bytes[artifact.path.filename().string()] = buffer.str();
    }
    fs::remove_all(cfg.output_dir);
    return bytes;
}

Verdict criterion9() {
    const fs::path base = fs::temp_directory_path() / "phasesim_acceptance";
    std::vector<ScenarioConfig> cases;

    ScenarioConfig evolve;
    evolve.kind = ScenarioKind::Evolve;
    evolve.p0 = 1.0;
    evolve.q_min = -8.0;
    evolve.q_max = 8.0;
    evolve.p_min = -7.0;
    evolve.p_max = 9.0;
    evolve.nq = 64;
    evolve.np = 64;
    evolve.horizon = 0.05;
    evolve.snapshot_times = {0.02};
    evolve.seed = 1;
    cases.push_back(evolve);

    ScenarioConfig moments;
    moments.kind = ScenarioKind::Moments;
    moments.q0 = 1.0;
    moments.a = 0.2;
    moments.b = 0.2;
    moments.potential = {0.0, 0.0, 0.0, 0.0, 0.25};
    moments.horizon = 0.5;
    moments.seed = 2;
    cases.push_back(moments);

    ScenarioConfig ensemble;
    ensemble.kind = ScenarioKind::Ensemble;
    ensemble.potential = {0.0, 0.0, 0.0, 0.0, 0.25};
    ensemble.particles = 4096;
    ensemble.horizon = 0.1;
    ensemble.report_times = {0.05, 0.1};
    ensemble.seed = 3;
    cases.push_back(ensemble);

    ScenarioConfig measure;
    measure.kind = ScenarioKind::Measure;
    measure.sigma_syst = 0.2;
    measure.sigma_rand = 0.5;
    measure.offset = 0.1;
    measure.x_true = 0.3;
    measure.samples = 2000;
    measure.seed = 4;
    cases.push_back(measure);

    ScenarioConfig converge;
    converge.kind = ScenarioKind::Converge;
    converge.step = RationalStep(1, 20);
    converge.sigma_syst = 0.2;
    converge.sigma_rand = 0.5;
    converge.n_schedule = {100, 1000};
    converge.trials = 4;
    converge.has_interval = true;
    converge.interval_a = -1.975;
    converge.interval_b = 1.975;
    converge.seed = 5;
    cases.push_back(converge);

    ScenarioConfig compose;
    compose.kind = ScenarioKind::Compose;
    compose.sigma_syst = 0.1;
    compose.sigma_rand = 0.5;
    compose.x_true = 0.2;
    compose.samples = 5000;
    compose.has_momentum_model = true;
    compose.momentum_mean = 1.0;
    compose.momentum_var = 0.2;
    compose.horizon = 0.05;
    compose.q_min = -2.0;
    compose.q_max = 2.0;
    compose.p_min = -2.0;
    compose.p_max = 4.0;
    compose.nq = 128;
    compose.np = 128;
    compose.seed = 6;
    cases.push_back(compose);

    bool pass = true;
    std::string detail;
    int checked_files = 0;
    for (ScenarioConfig& cfg : cases) {
        const std::string kind = to_string(cfg.kind);
        cfg.output_dir = (base / kind).string();
        auto first = run_and_collect_csv(cfg);
        auto second = run_and_collect_csv(cfg);
        bool same = first == second && !first.empty();
        if (cfg.kind == ScenarioKind::Ensemble) {
            ScenarioConfig reshard = cfg;
            reshard.shards = 1;
            auto one = run_and_collect_csv(reshard);
            reshard.shards = 8;
            auto eight = run_and_collect_csv(reshard);
            same = same && one == eight && one.at("ensemble.csv") == first.at("ensemble.csv");
        }
        checked_files += static_cast<int>(first.size());
        pass = pass && same;
        if (!same) detail += fmt("%s diverged; ", kind.c_str());
    }
    fs::remove_all(base);

    Verdict v;
    v.pass = pass;
    v.detail = detail + fmt("%d csv artifacts byte-compared across reruns (all six kinds, "
                            "ensemble also across shard counts)",
                            checked_files);
    return v;
}

Verdict guarded(Verdict (*fn)()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, fmt("threw: %s", e.what())};
    }
}

}  // namespace

int main() {
    try {
        FreeRunResult free_run = run_free_motion();
        report(1, criterion1(free_run));
        report(2, criterion2(free_run));
    } catch (const std::exception& e) {
        report(1, {false, fmt("threw: %s", e.what())});
        report(2, {false, "shared free-motion run failed"});
    }
    report(3, guarded(criterion3));
    report(4, guarded(criterion4));
    report(5, guarded(criterion5));
    report(6, guarded(criterion6));
    report(7, guarded(criterion7));
    report(8, guarded(criterion8));
    report(9, guarded(criterion9));

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
