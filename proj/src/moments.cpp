#include "phasesim/moments.hpp"

#include <cmath>
#include <string>

#include "phasesim/dynamics.hpp"
#include "phasesim/errors.hpp"

namespace phasesim {

namespace {

constexpr double kClosureDefectTolerance = 1e-9;

MomentState axpy(const MomentState& y, double c, const MomentRates& k) {
    MomentState out;
    out.mean_q = y.mean_q + c * k.mean_q;
    out.mean_p = y.mean_p + c * k.mean_p;
    out.var_q = y.var_q + c * k.var_q;
    out.var_p = y.var_p + c * k.var_p;
    out.cov_qp = y.cov_qp + c * k.cov_qp;
    return out;
}

MomentState rk4_moment_step(const MomentState& y, const Hamiltonian& h, double dt) {
    const MomentRates k1 = moment_rhs(y, h);
    const MomentRates k2 = moment_rhs(axpy(y, 0.5 * dt, k1), h);
    const MomentRates k3 = moment_rhs(axpy(y, 0.5 * dt, k2), h);
    const MomentRates k4 = moment_rhs(axpy(y, dt, k3), h);
    MomentState out;
    out.mean_q =
        y.mean_q + dt / 6.0 * (k1.mean_q + 2.0 * k2.mean_q + 2.0 * k3.mean_q + k4.mean_q);
    out.mean_p =
        y.mean_p + dt / 6.0 * (k1.mean_p + 2.0 * k2.mean_p + 2.0 * k3.mean_p + k4.mean_p);
    out.var_q = y.var_q + dt / 6.0 * (k1.var_q + 2.0 * k2.var_q + 2.0 * k3.var_q + k4.var_q);
    out.var_p = y.var_p + dt / 6.0 * (k1.var_p + 2.0 * k2.var_p + 2.0 * k3.var_p + k4.var_p);
    out.cov_qp =
        y.cov_qp + dt / 6.0 * (k1.cov_qp + 2.0 * k2.cov_qp + 2.0 * k3.cov_qp + k4.cov_qp);
    return out;
}

}  // namespace

MomentRates moment_rhs(const MomentState& ms, const Hamiltonian& h) {
    const Potential& v = h.potential();
    if (v.degree() > 4) {
        throw ValidationError("moment closure supports potential degree <= 4, got degree " +
                              std::to_string(v.degree()));
    }
    const double m = h.mass();
    const double v1 = v.derivative(ms.mean_q, 1);
    const double v2 = v.derivative(ms.mean_q, 2);
    const double v3 = v.derivative(ms.mean_q, 3);
    MomentRates r;
    r.mean_q = ms.mean_p / m;
    r.mean_p = -(v1 + 0.5 * v3 * ms.var_q);
    r.var_q = 2.0 * ms.cov_qp / m;
    r.var_p = -2.0 * v2 * ms.cov_qp;
    r.cov_qp = ms.var_p / m - v2 * ms.var_q;
    return r;
}

MomentTrajectory evolve_moments(const MomentState& ms0, const Hamiltonian& h, double t,
                                double dt) {
    if (!(dt > 0.0)) {
        throw ValidationError("moment integration dt must be > 0");
    }
    if (t < 0.0) {
        throw ValidationError("moment horizon must be >= 0");
    }
    MomentTrajectory traj;
    const auto accept = [&traj](double tt, const MomentState& st) {
        if (st.covariance_defect() > kClosureDefectTolerance) {
            throw NumericalError(
                "closure breakdown: covariance inequality violated at t = " +
                std::to_string(tt));
        }
        traj.push_back({tt, st});
    };
    MomentState y = ms0;
    accept(0.0, y);
    const StepPlan plan = make_step_plan(t, dt);
    double time = 0.0;
    for (long long k = 0; k < plan.full_steps; ++k) {
        y = rk4_moment_step(y, h, dt);
        time += dt;
        accept(time, y);
    }
    if (plan.remainder > 0.0) {
        y = rk4_moment_step(y, h, plan.remainder);
        time += plan.remainder;
        accept(time, y);
    }
    return traj;
}

NewtonTrajectory newton_trajectory(PhasePoint z0, const Hamiltonian& h, double t,
                                   double dt) {
    if (!(dt > 0.0)) {
        throw ValidationError("trajectory dt must be > 0");
    }
    if (t < 0.0) {
        throw ValidationError("trajectory horizon must be >= 0");
    }
    NewtonTrajectory traj;
    traj.push_back({0.0, z0});
    const StepPlan plan = make_step_plan(t, dt);
    PhasePoint z = z0;
    double time = 0.0;
    for (long long k = 0; k < plan.full_steps; ++k) {
        z = hamilton_step(z, h, dt, IntegratorScheme::Rk4);
        time += dt;
        traj.push_back({time, z});
    }
    if (plan.remainder > 0.0) {
        z = hamilton_step(z, h, plan.remainder, IntegratorScheme::Rk4);
        time += plan.remainder;
        traj.push_back({time, z});
    }
    return traj;
}

CorrectionSeries newton_correction(const GaussianState& s, const Hamiltonian& h, double t,
                                   double dt) {
    const MomentTrajectory mt = evolve_moments(s.moments(), h, t, dt);
    const NewtonTrajectory nt = newton_trajectory({s.q0(), s.p0()}, h, t, dt);
    CorrectionSeries out;
    out.reserve(mt.size());
    for (size_t k = 0; k < mt.size(); ++k) {
        const double mean_q = mt[k].state.mean_q;
        const double q_newton = nt[k].z.q;
        out.push_back({mt[k].t, mean_q, q_newton, mean_q - q_newton});
    }
    return out;
}

}  // namespace phasesim
