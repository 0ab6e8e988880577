#ifndef PHASESIM_MOMENTS_HPP
#define PHASESIM_MOMENTS_HPP

#include <vector>

#include "phasesim/phase_space.hpp"

namespace phasesim {

/// Time derivative of the five tracked moments.
struct MomentRates {
    double mean_q = 0.0;
    double mean_p = 0.0;
    double var_q = 0.0;
    double var_p = 0.0;
    double cov_qp = 0.0;
};

struct MomentSample {
    double t = 0.0;
    MomentState state;
};

struct NewtonSample {
    double t = 0.0;
    PhasePoint z;
};

using MomentTrajectory = std::vector<MomentSample>;
using NewtonTrajectory = std::vector<NewtonSample>;

struct CorrectionPoint {
    double t = 0.0;
    double mean_q = 0.0;
    double q_newton = 0.0;
    double correction = 0.0;
};

using CorrectionSeries = std::vector<CorrectionPoint>;

/// Rates of the closed moment hierarchy: third central moments are set to
/// zero, so the mean force carries the V''' * var_q / 2 correction and the
/// second moments follow the linearized flow around the mean.
/// Requires potential degree <= 4.
MomentRates moment_rhs(const MomentState& ms, const Hamiltonian& h);

/// Integrate moment_rhs with classical RK4, recording every accepted step
/// (t = 0 included; a shorter final step lands exactly on t). Throws
/// NumericalError when the covariance inequality cov^2 <= var_q * var_p is
/// violated by more than 1e-9, which signals closure breakdown.
MomentTrajectory evolve_moments(const MomentState& ms0, const Hamiltonian& h, double t,
                                double dt);

/// Single-particle trajectory under Hamilton's equations, RK4, sampled at
/// every step on the same time lattice evolve_moments uses.
NewtonTrajectory newton_trajectory(PhasePoint z0, const Hamiltonian& h, double t,
                                   double dt);

/// Pointwise mean_q minus the point trajectory started at (q0, p0).
CorrectionSeries newton_correction(const GaussianState& s, const Hamiltonian& h, double t,
                                   double dt);

}  // namespace phasesim

#endif
