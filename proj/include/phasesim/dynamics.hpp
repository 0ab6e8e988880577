#ifndef PHASESIM_DYNAMICS_HPP
#define PHASESIM_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasesim/phase_space.hpp"

namespace phasesim {

enum class IntegratorScheme { Leapfrog, Rk4 };

struct IntegratorConfig {
    double dt = 1e-3;
    IntegratorScheme scheme = IntegratorScheme::Leapfrog;

    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

enum class Interpolation { Bilinear, CubicClamped };

struct SolverConfig {
    IntegratorConfig integrator;
    Interpolation interpolation = Interpolation::CubicClamped;
    bool renormalize_each_step = true;
    double mass_leak_tolerance = 0.01;  // in (0, 0.1]

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// One integrator step of Hamilton's equations q' = p/m, p' = -dV/dq.
/// The leapfrog scheme is symplectic and time reversible; negative dt steps
/// backward.
PhasePoint hamilton_step(PhasePoint z, const Hamiltonian& h, double dt,
                         IntegratorScheme scheme);

/// Splits |t| into full steps of dt plus one exact final partial step.
struct StepPlan {
    long long full_steps = 0;
    double remainder = 0.0;  // in [0, dt)
    double direction = 1.0;  // sign of t
};
StepPlan make_step_plan(double t, double dt);

/// Characteristic flow over time t (negative t flows backward).
PhasePoint hamilton_flow(PhasePoint z, const Hamiltonian& h, double t,
                         const IntegratorConfig& cfg);

/// Advisory check: for a harmonic well the step should resolve the period.
std::optional<std::string> step_size_warning(const IntegratorConfig& cfg,
                                             const Hamiltonian& h);

/// Interpolate a grid density at an arbitrary point; points outside the
/// domain read as 0, and cubic results are clamped to be nonnegative.
double interpolate_density(const GridDensity& d, PhasePoint z, Interpolation interp);

struct StepDiagnostic {
    double t = 0.0;        // time after the step
    double raw_mass = 0.0; // mass before any renormalization
};

/// Semi-Lagrangian transport of a grid density along the Hamiltonian
/// characteristics: each step traces every node backward by one step of the
/// integrator and interpolates the current field at the foot point.
///
/// The foot points depend only on the step size, so they are computed once
/// per solver and reused every step.
class SemiLagrangianSolver {
public:
    SemiLagrangianSolver(const GridDensity& d0, const Hamiltonian& h,
                         const SolverConfig& cfg);
    SemiLagrangianSolver(SemiLagrangianSolver&&) noexcept;
    SemiLagrangianSolver& operator=(SemiLagrangianSolver&&) noexcept;
    ~SemiLagrangianSolver();

    /// Run n full steps of cfg.integrator.dt.
    void advance_steps(long long n);
    /// Run full steps plus an exact partial step covering time t >= 0.
    void advance_by(double t);

    double time() const { return time_; }
    const std::vector<StepDiagnostic>& diagnostics() const { return diagnostics_; }
    GridDensity density() const;
    /// Fused single-pass moments of the current field.
    MomentState moments() const;

private:
    struct Stencil;
    void step_with(const std::vector<Stencil>& stencils, double dt);
    std::vector<Stencil> build_stencils(double dt) const;

    GridSpec spec_;
    Hamiltonian h_;
    SolverConfig cfg_;
    int stride_;                    // padded row length
    std::vector<double> field_;     // padded, ghost border of zeros
    std::vector<double> scratch_;
    std::vector<Stencil> stencils_; // for the nominal dt
    std::vector<StepDiagnostic> diagnostics_;
    double time_ = 0.0;
    double retained_ = 1.0;  // cumulative fraction of the initial mass kept
    long long steps_done_ = 0;
};

struct EvolveResult {
    GridDensity density;
    std::vector<StepDiagnostic> steps;
};

/// Solve the transport problem from d0 over [0, t].
/// Throws NumericalError when the cumulative retained mass falls below
/// 1 - cfg.mass_leak_tolerance (mass escaping the domain).
EvolveResult evolve_semilagrangian(const GridDensity& d0, const Hamiltonian& h,
                                   double t, const SolverConfig& cfg);

/// Free-motion moments: mean_q = q0 + p0 t/m, mean_p = p0,
/// var_q = (a^2 + b^2 t^2/m^2)/2, var_p = b^2/2, cov_qp = b^2 t/(2m).
MomentState analytic_gaussian_free(const GaussianState& s, double mass, double t);

/// Exact pushforward of the Gaussian moments through the linear flow of a
/// potential of degree <= 2.
MomentState analytic_gaussian_linear(const GaussianState& s, const Hamiltonian& h,
                                     double t);

struct MomentStandardErrors {
    double mean_q = 0.0;
    double mean_p = 0.0;
    double var_q = 0.0;
    double var_p = 0.0;
    double cov_qp = 0.0;
};

struct EnsembleResult {
    double t = 0.0;
    MomentState moments;
    MomentStandardErrors standard_errors;
    long long particle_count = 0;
    std::uint64_t seed = 0;
};

struct EnsembleConfig {
    IntegratorConfig integrator;
    int shards = 0;  // worker threads; 0 = hardware concurrency
};

/// Monte Carlo moments: draw n points from s, push each through the
/// characteristic flow, report sample moments with standard errors.
/// Results are bitwise deterministic in (seed, n, cfg.integrator) regardless
/// of the shard count: particles are sampled and reduced in fixed-size
/// blocks with per-block substreams.
EnsembleResult ensemble_evolve(const GaussianState& s, const Hamiltonian& h, double t,
                               long long n, std::uint64_t seed, const EnsembleConfig& cfg);

/// Same, reporting at several increasing times from a single particle set.
std::vector<EnsembleResult> ensemble_evolve_at(const GaussianState& s, const Hamiltonian& h,
                                               std::span<const double> times, long long n,
                                               std::uint64_t seed, const EnsembleConfig& cfg);

}  // namespace phasesim

#endif
