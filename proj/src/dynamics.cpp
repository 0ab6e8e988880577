#include "phasesim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "phasesim/rng.hpp"

namespace phasesim {

namespace {

struct CubicWeights {
    double w[4];
};

// Lagrange weights for equispaced nodes {-1, 0, 1, 2} at s in [0, 1).
inline CubicWeights cubic_weights(double s) {
    const double sm1 = s - 1.0;
    const double sm2 = s - 2.0;
    const double sp1 = s + 1.0;
    return {{-s * sm1 * sm2 / 6.0, sp1 * sm1 * sm2 / 2.0, -sp1 * s * sm2 / 2.0,
             sp1 * s * sm1 / 6.0}};
}

PhasePoint rk4_step(PhasePoint z, const Hamiltonian& h, double dt) {
    const double m = h.mass();
    const auto dq = [&](const PhasePoint& w) { return w.p / m; };
    const auto dp = [&](const PhasePoint& w) { return h.force(w.q); };
    const PhasePoint k1{dq(z), dp(z)};
    const PhasePoint z2{z.q + 0.5 * dt * k1.q, z.p + 0.5 * dt * k1.p};
    const PhasePoint k2{dq(z2), dp(z2)};
    const PhasePoint z3{z.q + 0.5 * dt * k2.q, z.p + 0.5 * dt * k2.p};
    const PhasePoint k3{dq(z3), dp(z3)};
    const PhasePoint z4{z.q + dt * k3.q, z.p + dt * k3.p};
    const PhasePoint k4{dq(z4), dp(z4)};
    return {z.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            z.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
}

inline PhasePoint leapfrog_step(PhasePoint z, const Hamiltonian& h, double dt) {
    const double half = 0.5 * dt;
    const double p_half = z.p + half * h.force(z.q);
    const double q_new = z.q + dt * p_half / h.mass();
    const double p_new = p_half + half * h.force(q_new);
    return {q_new, p_new};
}

/// Run fn(b) for b in [0, nblocks) on `workers` threads. The work is pure
/// per-block, so the schedule cannot affect results.
template <typename Fn>
void parallel_blocks(long long nblocks, int workers, Fn&& fn) {
    if (workers <= 1 || nblocks <= 1) {
        for (long long b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&] {
        for (;;) {
            const long long b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<long long>(workers, nblocks));
    pool.reserve(count);
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

PhasePoint hamilton_step(PhasePoint z, const Hamiltonian& h, double dt,
                         IntegratorScheme scheme) {
    switch (scheme) {
        case IntegratorScheme::Leapfrog:
            return leapfrog_step(z, h, dt);
        case IntegratorScheme::Rk4:
            return rk4_step(z, h, dt);
    }
    throw ValidationError("unknown integrator scheme");
}

StepPlan make_step_plan(double t, double dt) {
    if (!(dt > 0.0)) {
        throw ValidationError("integrator dt must be > 0");
    }
    StepPlan plan;
    plan.direction = t < 0.0 ? -1.0 : 1.0;
    const double at = std::abs(t);
    if (at == 0.0) return plan;
    const long long rounded = static_cast<long long>(std::llround(at / dt));
    if (std::abs(at - static_cast<double>(rounded) * dt) <= 1e-9 * dt) {
        plan.full_steps = rounded;
        return plan;
    }
    plan.full_steps = static_cast<long long>(std::floor(at / dt));
    plan.remainder = at - static_cast<double>(plan.full_steps) * dt;
    return plan;
}

PhasePoint hamilton_flow(PhasePoint z, const Hamiltonian& h, double t,
                         const IntegratorConfig& cfg) {
    const StepPlan plan = make_step_plan(t, cfg.dt);
    const double step = plan.direction * cfg.dt;
    for (long long k = 0; k < plan.full_steps; ++k) {
        z = hamilton_step(z, h, step, cfg.scheme);
    }
    if (plan.remainder > 0.0) {
        z = hamilton_step(z, h, plan.direction * plan.remainder, cfg.scheme);
    }
    return z;
}

std::optional<std::string> step_size_warning(const IntegratorConfig& cfg,
                                             const Hamiltonian& h) {
    const Potential& v = h.potential();
    if (v.degree() != 2 || v.coefficients()[2] <= 0.0) return std::nullopt;
    const double omega = std::sqrt(2.0 * v.coefficients()[2] / h.mass());
    const double period = 2.0 * std::numbers::pi / omega;
    if (cfg.dt <= 0.1 * period) return std::nullopt;
    return "dt = " + std::to_string(cfg.dt) + " exceeds 10% of the harmonic period " +
           std::to_string(period);
}

double interpolate_density(const GridDensity& d, PhasePoint z, Interpolation interp) {
    const GridSpec& g = d.spec();
    if (!g.contains(z)) return 0.0;
    const auto at = [&](int i, int j) -> double {
        if (i < 0 || i >= g.nq || j < 0 || j >= g.np) return 0.0;
        return d.value(i, j);
    };
    const double fi = (z.q - g.q_min) / g.dq() - 0.5;
    const double fj = (z.p - g.p_min) / g.dp() - 0.5;
    const int i0 = static_cast<int>(std::floor(fi));
    const int j0 = static_cast<int>(std::floor(fj));
    const double si = fi - i0;
    const double sj = fj - j0;
    if (interp == Interpolation::Bilinear) {
        return (1.0 - si) * ((1.0 - sj) * at(i0, j0) + sj * at(i0, j0 + 1)) +
               si * ((1.0 - sj) * at(i0 + 1, j0) + sj * at(i0 + 1, j0 + 1));
    }
    const CubicWeights wq = cubic_weights(si);
    const CubicWeights wp = cubic_weights(sj);
    double acc = 0.0;
    for (int r = 0; r < 4; ++r) {
        double row = 0.0;
        for (int c = 0; c < 4; ++c) row += wp.w[c] * at(i0 - 1 + r, j0 - 1 + c);
        acc += wq.w[r] * row;
    }
    return std::max(0.0, acc);
}

// Ghost border width around the padded field; leaves room for the 4-point
// stencil of feet anywhere inside the domain.
constexpr int kGhost = 2;

struct SemiLagrangianSolver::Stencil {
    int base = -1;  // flattened padded index of the stencil origin; -1 = foot outside
    double wq[4] = {0.0, 0.0, 0.0, 0.0};
    double wp[4] = {0.0, 0.0, 0.0, 0.0};
};

SemiLagrangianSolver::SemiLagrangianSolver(SemiLagrangianSolver&&) noexcept = default;
SemiLagrangianSolver& SemiLagrangianSolver::operator=(SemiLagrangianSolver&&) noexcept =
    default;
SemiLagrangianSolver::~SemiLagrangianSolver() = default;

SemiLagrangianSolver::SemiLagrangianSolver(const GridDensity& d0, const Hamiltonian& h,
                                           const SolverConfig& cfg)
    : spec_(d0.spec()), h_(h), cfg_(cfg), stride_(d0.np() + 2 * kGhost) {
    if (!(cfg.mass_leak_tolerance > 0.0) || cfg.mass_leak_tolerance > 0.1) {
        throw ValidationError("mass_leak_tolerance must lie in (0, 0.1]");
    }
    if (!(cfg.integrator.dt > 0.0)) {
        throw ValidationError("integrator dt must be > 0");
    }
    const size_t padded = static_cast<size_t>(spec_.nq + 2 * kGhost) * stride_;
    field_.assign(padded, 0.0);
    scratch_.assign(padded, 0.0);
    for (int i = 0; i < spec_.nq; ++i) {
        for (int j = 0; j < spec_.np; ++j) {
            field_[static_cast<size_t>(i + kGhost) * stride_ + (j + kGhost)] = d0.value(i, j);
        }
    }
    stencils_ = build_stencils(cfg_.integrator.dt);
}

std::vector<SemiLagrangianSolver::Stencil> SemiLagrangianSolver::build_stencils(
    double dt) const {
    std::vector<Stencil> stencils(static_cast<size_t>(spec_.nq) * spec_.np);
    const bool cubic = cfg_.interpolation == Interpolation::CubicClamped;
    size_t idx = 0;
    for (int i = 0; i < spec_.nq; ++i) {
        const double q = spec_.q_center(i);
        for (int j = 0; j < spec_.np; ++j, ++idx) {
            const PhasePoint foot =
                hamilton_step({q, spec_.p_center(j)}, h_, -dt, cfg_.integrator.scheme);
            if (!spec_.contains(foot)) continue;  // outside reads as zero
            const double fi = (foot.q - spec_.q_min) / spec_.dq() - 0.5;
            const double fj = (foot.p - spec_.p_min) / spec_.dp() - 0.5;
            const int i0 = static_cast<int>(std::floor(fi));
            const int j0 = static_cast<int>(std::floor(fj));
            const double si = fi - i0;
            const double sj = fj - j0;
            Stencil& st = stencils[idx];
            if (cubic) {
                // origin at (i0-1, j0-1): rows i0-1..i0+2 fit inside the
                // ghosted field for any foot inside the domain
                st.base = (i0 - 1 + kGhost) * stride_ + (j0 - 1 + kGhost);
                const CubicWeights wq = cubic_weights(si);
                const CubicWeights wp = cubic_weights(sj);
                for (int r = 0; r < 4; ++r) st.wq[r] = wq.w[r];
                for (int c = 0; c < 4; ++c) st.wp[c] = wp.w[c];
            } else {
                st.base = (i0 + kGhost) * stride_ + (j0 + kGhost);
                st.wq[0] = 1.0 - si;
                st.wq[1] = si;
                st.wp[0] = 1.0 - sj;
                st.wp[1] = sj;
            }
        }
    }
    return stencils;
}

void SemiLagrangianSolver::step_with(const std::vector<Stencil>& stencils, double dt) {
    const double* src = field_.data();
    double* dst = scratch_.data();
    const int stride = stride_;
    const bool cubic = cfg_.interpolation == Interpolation::CubicClamped;
    size_t idx = 0;
    for (int i = 0; i < spec_.nq; ++i) {
        double* out = dst + static_cast<size_t>(i + kGhost) * stride + kGhost;
        if (cubic) {
            for (int j = 0; j < spec_.np; ++j, ++idx) {
                const Stencil& st = stencils[idx];
                double v = 0.0;
                if (st.base >= 0) {
                    const double* row = src + st.base;
                    double acc = 0.0;
                    for (int r = 0; r < 4; ++r, row += stride) {
                        acc += st.wq[r] * (st.wp[0] * row[0] + st.wp[1] * row[1] +
                                           st.wp[2] * row[2] + st.wp[3] * row[3]);
                    }
                    v = std::max(0.0, acc);
                }
                out[j] = v;
            }
        } else {
            for (int j = 0; j < spec_.np; ++j, ++idx) {
                const Stencil& st = stencils[idx];
                double v = 0.0;
                if (st.base >= 0) {
                    const double* row = src + st.base;
                    v = st.wq[0] * (st.wp[0] * row[0] + st.wp[1] * row[1]) +
                        st.wq[1] * (st.wp[0] * row[stride] + st.wp[1] * row[stride + 1]);
                }
                out[j] = v;
            }
        }
    }

    double sum = 0.0;
    for (int i = 0; i < spec_.nq; ++i) {
        const double* row = dst + static_cast<size_t>(i + kGhost) * stride + kGhost;
        double rsum = 0.0;
        for (int j = 0; j < spec_.np; ++j) rsum += row[j];
        sum += rsum;
    }
    const double raw_mass = sum * spec_.dq() * spec_.dp();
    time_ += dt;
    ++steps_done_;
    // With per-step renormalization the raw mass is relative to the previous
    // renormalized field, so the escaped fraction is the product of the
    // per-step values; without it the raw mass already is that product.
    retained_ = cfg_.renormalize_each_step ? retained_ * raw_mass : raw_mass;
    if (retained_ < 1.0 - cfg_.mass_leak_tolerance) {
        throw NumericalError("mass leak: retained mass " + std::to_string(retained_) +
                             " at t = " + std::to_string(time_) +
                             " fell below 1 - tolerance; density is escaping the domain");
    }
    if (cfg_.renormalize_each_step && raw_mass > 0.0) {
        const double inv = 1.0 / raw_mass;
        for (int i = 0; i < spec_.nq; ++i) {
            double* row = dst + static_cast<size_t>(i + kGhost) * stride + kGhost;
            for (int j = 0; j < spec_.np; ++j) row[j] *= inv;
        }
    }
    diagnostics_.push_back({time_, raw_mass});
    std::swap(field_, scratch_);
}

void SemiLagrangianSolver::advance_steps(long long n) {
    for (long long k = 0; k < n; ++k) {
        step_with(stencils_, cfg_.integrator.dt);
    }
}

void SemiLagrangianSolver::advance_by(double t) {
    if (t < 0.0) {
        throw ValidationError("solver advance time must be >= 0");
    }
    const StepPlan plan = make_step_plan(t, cfg_.integrator.dt);
    advance_steps(plan.full_steps);
    if (plan.remainder > 0.0) {
        step_with(build_stencils(plan.remainder), plan.remainder);
    }
}

GridDensity SemiLagrangianSolver::density() const {
    std::vector<double> values(static_cast<size_t>(spec_.nq) * spec_.np);
    for (int i = 0; i < spec_.nq; ++i) {
        const double* row = field_.data() + static_cast<size_t>(i + kGhost) * stride_ + kGhost;
        for (int j = 0; j < spec_.np; ++j) {
            values[static_cast<size_t>(i) * spec_.np + j] = row[j];
        }
    }
    return GridDensity(spec_, std::move(values));
}

MomentState SemiLagrangianSolver::moments() const {
    double s0 = 0.0, sq = 0.0, sp = 0.0, sqq = 0.0, spp = 0.0, sqp = 0.0;
    for (int i = 0; i < spec_.nq; ++i) {
        const double q = spec_.q_center(i);
        const double* row = field_.data() + static_cast<size_t>(i + kGhost) * stride_ + kGhost;
        double r0 = 0.0, rp = 0.0, rpp = 0.0;
        for (int j = 0; j < spec_.np; ++j) {
            const double v = row[j];
            const double p = spec_.p_center(j);
            r0 += v;
            rp += v * p;
            rpp += v * p * p;
        }
        s0 += r0;
        sq += r0 * q;
        sqq += r0 * q * q;
        sp += rp;
        sqp += rp * q;
        spp += rpp;
    }
    if (s0 <= 0.0) {
        throw NumericalError("moments undefined for zero-mass field");
    }
    MomentState ms;
    ms.mean_q = sq / s0;
    ms.mean_p = sp / s0;
    ms.var_q = sqq / s0 - ms.mean_q * ms.mean_q;
    ms.var_p = spp / s0 - ms.mean_p * ms.mean_p;
    ms.cov_qp = sqp / s0 - ms.mean_q * ms.mean_p;
    return ms;
}

EvolveResult evolve_semilagrangian(const GridDensity& d0, const Hamiltonian& h,
                                   double t, const SolverConfig& cfg) {
    SemiLagrangianSolver solver(d0, h, cfg);
    solver.advance_by(t);
    return {solver.density(), solver.diagnostics()};
}

MomentState analytic_gaussian_free(const GaussianState& s, double mass, double t) {
    if (!(mass > 0.0)) {
        throw ValidationError("mass must be strictly positive");
    }
    const double a2 = s.a() * s.a();
    const double b2 = s.b() * s.b();
    MomentState ms;
    ms.mean_q = s.q0() + s.p0() * t / mass;
    ms.mean_p = s.p0();
    ms.var_q = 0.5 * (a2 + b2 * t * t / (mass * mass));
    ms.var_p = 0.5 * b2;
    ms.cov_qp = 0.5 * b2 * t / mass;
    return ms;
}

MomentState analytic_gaussian_linear(const GaussianState& s, const Hamiltonian& h,
                                     double t) {
    const Potential& v = h.potential();
    if (v.degree() > 2) {
        throw ValidationError(
            "analytic linear propagation requires a potential of degree <= 2");
    }
    const double m = h.mass();
    const double c1 = v.degree() >= 1 ? v.coefficients()[1] : 0.0;
    const double c2 = v.degree() >= 2 ? v.coefficients()[2] : 0.0;

    // Flow matrix of the linear characteristic system q' = p/m, p' = -c1 - 2 c2 q.
    double m00, m01, m10, m11;
    if (c2 > 0.0) {
        const double omega = std::sqrt(2.0 * c2 / m);
        const double th = omega * t;
        m00 = std::cos(th);
        m01 = std::sin(th) / (m * omega);
        m10 = -m * omega * std::sin(th);
        m11 = std::cos(th);
    } else if (c2 < 0.0) {
        const double lam = std::sqrt(-2.0 * c2 / m);
        const double th = lam * t;
        m00 = std::cosh(th);
        m01 = std::sinh(th) / (m * lam);
        m10 = m * lam * std::sinh(th);
        m11 = std::cosh(th);
    } else {
        m00 = 1.0;
        m01 = t / m;
        m10 = 0.0;
        m11 = 1.0;
    }

    MomentState ms0 = s.moments();
    MomentState ms;
    if (c2 != 0.0) {
        const double q_eq = -c1 / (2.0 * c2);
        const double dq = ms0.mean_q - q_eq;
        ms.mean_q = q_eq + m00 * dq + m01 * ms0.mean_p;
        ms.mean_p = m10 * dq + m11 * ms0.mean_p;
    } else {
        ms.mean_q = ms0.mean_q + ms0.mean_p * t / m - c1 * t * t / (2.0 * m);
        ms.mean_p = ms0.mean_p - c1 * t;
    }
    ms.var_q = m00 * m00 * ms0.var_q + 2.0 * m00 * m01 * ms0.cov_qp + m01 * m01 * ms0.var_p;
    ms.var_p = m10 * m10 * ms0.var_q + 2.0 * m10 * m11 * ms0.cov_qp + m11 * m11 * ms0.var_p;
    ms.cov_qp = m00 * m10 * ms0.var_q + (m00 * m11 + m01 * m10) * ms0.cov_qp +
                m01 * m11 * ms0.var_p;
    return ms;
}

namespace {

constexpr long long kEnsembleBlock = 8192;
constexpr std::uint64_t kSampleStream = 0x5A17;

struct FirstSums {
    double sq = 0.0, sp = 0.0;
};

struct CenteredSums {
    double qq = 0.0, pp = 0.0, qp = 0.0;
    double q4 = 0.0, p4 = 0.0, q2p2 = 0.0;
};

}  // namespace

std::vector<EnsembleResult> ensemble_evolve_at(const GaussianState& s, const Hamiltonian& h,
                                               std::span<const double> times, long long n,
                                               std::uint64_t seed, const EnsembleConfig& cfg) {
    if (n < 100) {
        throw ValidationError("ensemble needs at least 100 particles");
    }
    if (times.empty()) {
        throw ValidationError("ensemble needs at least one report time");
    }
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || (k > 0 && times[k] <= times[k - 1])) {
            throw ValidationError("ensemble report times must be increasing and >= 0");
        }
    }
    int workers = cfg.shards > 0 ? cfg.shards
                                 : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    const long long nblocks = (n + kEnsembleBlock - 1) / kEnsembleBlock;

    std::vector<double> q(static_cast<size_t>(n)), p(static_cast<size_t>(n));
    const double sd_q = s.a() / std::numbers::sqrt2;
    const double sd_p = s.b() / std::numbers::sqrt2;
    parallel_blocks(nblocks, workers, [&](long long b) {
        auto eng = make_engine(substream_seed(seed, kSampleStream, static_cast<std::uint64_t>(b)));
        std::normal_distribution<double> unit(0.0, 1.0);
        const long long lo = b * kEnsembleBlock;
        const long long hi = std::min(n, lo + kEnsembleBlock);
        for (long long i = lo; i < hi; ++i) {
            q[static_cast<size_t>(i)] = s.q0() + sd_q * unit(eng);
            p[static_cast<size_t>(i)] = s.p0() + sd_p * unit(eng);
        }
    });

    std::vector<EnsembleResult> results;
    results.reserve(times.size());
    double t_prev = 0.0;
    std::vector<FirstSums> firsts(static_cast<size_t>(nblocks));
    std::vector<CenteredSums> centereds(static_cast<size_t>(nblocks));
    for (double t_target : times) {
        const double dt_span = t_target - t_prev;
        if (dt_span > 0.0) {
            const StepPlan plan = make_step_plan(dt_span, cfg.integrator.dt);
            parallel_blocks(nblocks, workers, [&](long long b) {
                const long long lo = b * kEnsembleBlock;
                const long long hi = std::min(n, lo + kEnsembleBlock);
                for (long long i = lo; i < hi; ++i) {
                    PhasePoint z{q[static_cast<size_t>(i)], p[static_cast<size_t>(i)]};
                    for (long long k = 0; k < plan.full_steps; ++k) {
                        z = hamilton_step(z, h, cfg.integrator.dt, cfg.integrator.scheme);
                    }
                    if (plan.remainder > 0.0) {
                        z = hamilton_step(z, h, plan.remainder, cfg.integrator.scheme);
                    }
                    q[static_cast<size_t>(i)] = z.q;
                    p[static_cast<size_t>(i)] = z.p;
                }
            });
        }
        t_prev = t_target;

        parallel_blocks(nblocks, workers, [&](long long b) {
            const long long lo = b * kEnsembleBlock;
            const long long hi = std::min(n, lo + kEnsembleBlock);
            FirstSums fs;
            for (long long i = lo; i < hi; ++i) {
                fs.sq += q[static_cast<size_t>(i)];
                fs.sp += p[static_cast<size_t>(i)];
            }
            firsts[static_cast<size_t>(b)] = fs;
        });
        double sq = 0.0, sp = 0.0;
        for (long long b = 0; b < nblocks; ++b) {  // fixed reduction order
            sq += firsts[static_cast<size_t>(b)].sq;
            sp += firsts[static_cast<size_t>(b)].sp;
        }
        const double mean_q = sq / static_cast<double>(n);
        const double mean_p = sp / static_cast<double>(n);

        parallel_blocks(nblocks, workers, [&](long long b) {
            const long long lo = b * kEnsembleBlock;
            const long long hi = std::min(n, lo + kEnsembleBlock);
            CenteredSums cs;
            for (long long i = lo; i < hi; ++i) {
                const double dqv = q[static_cast<size_t>(i)] - mean_q;
                const double dpv = p[static_cast<size_t>(i)] - mean_p;
                const double dq2 = dqv * dqv;
                const double dp2 = dpv * dpv;
                cs.qq += dq2;
                cs.pp += dp2;
                cs.qp += dqv * dpv;
                cs.q4 += dq2 * dq2;
                cs.p4 += dp2 * dp2;
                cs.q2p2 += dq2 * dp2;
            }
            centereds[static_cast<size_t>(b)] = cs;
        });
        CenteredSums tot;
        for (long long b = 0; b < nblocks; ++b) {
            const CenteredSums& cs = centereds[static_cast<size_t>(b)];
            tot.qq += cs.qq;
            tot.pp += cs.pp;
            tot.qp += cs.qp;
            tot.q4 += cs.q4;
            tot.p4 += cs.p4;
            tot.q2p2 += cs.q2p2;
        }

        const double dn = static_cast<double>(n);
        EnsembleResult res;
        res.t = t_target;
        res.particle_count = n;
        res.seed = seed;
        res.moments.mean_q = mean_q;
        res.moments.mean_p = mean_p;
        res.moments.var_q = tot.qq / (dn - 1.0);
        res.moments.var_p = tot.pp / (dn - 1.0);
        res.moments.cov_qp = tot.qp / (dn - 1.0);
        const double m2q = tot.qq / dn;
        const double m2p = tot.pp / dn;
        const double m4q = tot.q4 / dn;
        const double m4p = tot.p4 / dn;
        const double m22 = tot.q2p2 / dn;
        const double mqp = tot.qp / dn;
        res.standard_errors.mean_q = std::sqrt(res.moments.var_q / dn);
        res.standard_errors.mean_p = std::sqrt(res.moments.var_p / dn);
        res.standard_errors.var_q = std::sqrt(std::max(0.0, m4q - m2q * m2q) / dn);
        res.standard_errors.var_p = std::sqrt(std::max(0.0, m4p - m2p * m2p) / dn);
        res.standard_errors.cov_qp = std::sqrt(std::max(0.0, m22 - mqp * mqp) / dn);
        results.push_back(res);
    }
    return results;
}

EnsembleResult ensemble_evolve(const GaussianState& s, const Hamiltonian& h, double t,
                               long long n, std::uint64_t seed, const EnsembleConfig& cfg) {
    return ensemble_evolve_at(s, h, std::span<const double>(&t, 1), n, seed, cfg)[0];
}

}  // namespace phasesim
