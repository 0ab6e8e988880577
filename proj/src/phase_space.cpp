#include "phasesim/phase_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace phasesim {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw ValidationError(std::string(what) + " must be finite");
    }
}

}  // namespace

GaussianState::GaussianState(double q0, double p0, double a, double b)
    : q0_(q0), p0_(p0), a_(a), b_(b) {
    require_finite(q0, "q0");
    require_finite(p0, "p0");
    require_finite(a, "a");
    require_finite(b, "b");
    if (a <= 0.0 || b <= 0.0) {
        throw ValidationError("Gaussian widths must satisfy a > 0 and b > 0");
    }
}

double GaussianState::density_at(PhasePoint z) const {
    const double uq = (z.q - q0_) / a_;
    const double up = (z.p - p0_) / b_;
    return std::exp(-uq * uq) * std::exp(-up * up) / (std::numbers::pi * a_ * b_);
}

MomentState GaussianState::moments() const {
    return {q0_, p0_, 0.5 * a_ * a_, 0.5 * b_ * b_, 0.0};
}

Potential::Potential(std::vector<double> coefficients, int max_degree)
    : coeffs_(std::move(coefficients)) {
    if (coeffs_.empty()) {
        throw ValidationError("potential needs at least one coefficient");
    }
    for (double c : coeffs_) {
        require_finite(c, "potential coefficient");
    }
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) {
        coeffs_.pop_back();
    }
    if (degree() > max_degree) {
        throw ValidationError("potential degree " + std::to_string(degree()) +
                              " exceeds cap " + std::to_string(max_degree));
    }
}

double Potential::derivative(double q, int order) const {
    if (order < 0 || order > kMaxDerivativeOrder) {
        throw ValidationError("unsupported potential derivative order " +
                              std::to_string(order));
    }
    // Horner evaluation of sum_{k>=order} c_k * k!/(k-order)! * q^(k-order).
    double acc = 0.0;
    for (int k = degree(); k >= order; --k) {
        double fall = 1.0;
        for (int r = 0; r < order; ++r) fall *= static_cast<double>(k - r);
        acc = acc * q + coeffs_[static_cast<size_t>(k)] * fall;
    }
    return acc;
}

Hamiltonian::Hamiltonian(double mass, Potential potential)
    : mass_(mass), potential_(std::move(potential)) {
    require_finite(mass, "mass");
    if (mass <= 0.0) {
        throw ValidationError("mass must be strictly positive");
    }
}

GridSpec GridSpec::around(const GaussianState& s, double widths, int nq, int np) {
    return GridSpec{s.q0() - widths * s.a(), s.q0() + widths * s.a(),
                    s.p0() - widths * s.b(), s.p0() + widths * s.b(), nq, np};
}

GridDensity::GridDensity(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    if (!(spec_.q_min < spec_.q_max) || !(spec_.p_min < spec_.p_max)) {
        throw ValidationError("grid bounds must be ordered");
    }
    if (spec_.nq < 2 || spec_.np < 2) {
        throw ValidationError("grid resolution must be at least 2 per axis");
    }
    if (values_.size() != static_cast<size_t>(spec_.nq) * spec_.np) {
        throw ValidationError("grid value count does not match resolution");
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("grid density values must be finite and >= 0");
        }
    }
}

double GridDensity::total_mass() const {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum * spec_.dq() * spec_.dp();
}

GridDensity GridDensity::normalized() const {
    const double mass = total_mass();
    if (mass <= 0.0) {
        throw NumericalError("cannot normalize a zero-mass grid density");
    }
    std::vector<double> scaled(values_);
    for (double& v : scaled) v /= mass;
    return GridDensity(spec_, std::move(scaled));
}

Observable Observable::one() {
    return {"one", [](double, double) { return 1.0; }};
}
Observable Observable::position() {
    return {"q", [](double q, double) { return q; }};
}
Observable Observable::momentum() {
    return {"p", [](double, double p) { return p; }};
}
Observable Observable::position_squared() {
    return {"q2", [](double q, double) { return q * q; }};
}
Observable Observable::momentum_squared() {
    return {"p2", [](double, double p) { return p * p; }};
}
Observable Observable::centered_position_squared(double c) {
    return {"(q-c)2", [c](double q, double) { return (q - c) * (q - c); }};
}
Observable Observable::centered_momentum_squared(double c) {
    return {"(p-c)2", [c](double, double p) { return (p - c) * (p - c); }};
}
Observable Observable::energy(const Hamiltonian& h) {
    return {"H", [h](double q, double p) { return h.energy({q, p}); }};
}

GridDensity grid_from_state(const GaussianState& s, const GridSpec& spec) {
    std::vector<double> values(static_cast<size_t>(spec.nq) * spec.np);
    for (int i = 0; i < spec.nq; ++i) {
        const double q = spec.q_center(i);
        for (int j = 0; j < spec.np; ++j) {
            values[static_cast<size_t>(i) * spec.np + j] = s.density_at({q, spec.p_center(j)});
        }
    }
    GridDensity raw(spec, std::move(values));
    const double mass = raw.total_mass();
    if (mass < 0.99) {
        throw NumericalError("domain too small: sampled mass " + std::to_string(mass) +
                             " < 0.99, state is truncated");
    }
    return raw.normalized();
}

double integrate_observable(const GridDensity& d, const Observable& f) {
    const GridSpec& spec = d.spec();
    double sum = 0.0;
    for (int i = 0; i < spec.nq; ++i) {
        const double q = spec.q_center(i);
        double row = 0.0;
        for (int j = 0; j < spec.np; ++j) {
            row += f(q, spec.p_center(j)) * d.value(i, j);
        }
        sum += row;
    }
    return sum * spec.dq() * spec.dp();
}

MomentState grid_moments(const GridDensity& d) {
    const double mass = d.total_mass();
    if (mass <= 0.0) {
        throw NumericalError("grid moments undefined for zero-mass density");
    }
    MomentState ms;
    ms.mean_q = integrate_observable(d, Observable::position()) / mass;
    ms.mean_p = integrate_observable(d, Observable::momentum()) / mass;
    ms.var_q = integrate_observable(d, Observable::centered_position_squared(ms.mean_q)) / mass;
    ms.var_p = integrate_observable(d, Observable::centered_momentum_squared(ms.mean_p)) / mass;
    const Observable cross("(q-mq)(p-mp)", [&](double q, double p) {
        return (q - ms.mean_q) * (p - ms.mean_p);
    });
    ms.cov_qp = integrate_observable(d, cross) / mass;
    return ms;
}

}  // namespace phasesim
