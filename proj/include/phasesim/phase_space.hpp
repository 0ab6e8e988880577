#ifndef PHASESIM_PHASE_SPACE_HPP
#define PHASESIM_PHASE_SPACE_HPP

#include <functional>
#include <string>
#include <vector>

#include "phasesim/errors.hpp"

namespace phasesim {

/// A point (q, p) of the single-particle phase plane.
struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

/// First and central second moments of a phase-space density.
struct MomentState {
    double mean_q = 0.0;
    double mean_p = 0.0;
    double var_q = 0.0;
    double var_p = 0.0;
    double cov_qp = 0.0;

    /// cov_qp^2 - var_q*var_p; positive values violate the covariance
    /// inequality.
    double covariance_defect() const { return cov_qp * cov_qp - var_q * var_p; }
};

/// Normalized Gaussian phase-space density
///   rho(q,p) = 1/(pi a b) exp(-(q-q0)^2/a^2) exp(-(p-p0)^2/b^2).
///
/// The widths a and b must be strictly positive: point-mass states are not
/// representable.
class GaussianState {
public:
    GaussianState(double q0, double p0, double a, double b);

    double q0() const { return q0_; }
    double p0() const { return p0_; }
    double a() const { return a_; }
    double b() const { return b_; }

    double density_at(PhasePoint z) const;

    /// mean_q=q0, mean_p=p0, var_q=a^2/2, var_p=b^2/2, cov_qp=0.
    MomentState moments() const;

    friend bool operator==(const GaussianState&, const GaussianState&) = default;

private:
    double q0_, p0_, a_, b_;
};

/// Polynomial potential V(q) = sum_k c_k q^k. Trailing zero coefficients are
/// stripped on construction; the degree cap keeps the moment-closure
/// equations well defined.
class Potential {
public:
    static constexpr int kDefaultMaxDegree = 6;
    static constexpr int kMaxDerivativeOrder = 3;

    explicit Potential(std::vector<double> coefficients,
                       int max_degree = kDefaultMaxDegree);

    /// Free particle, V = 0.
    static Potential free_particle() { return Potential({0.0}); }
    /// V = (k/2) q^2.
    static Potential harmonic(double k = 1.0) { return Potential({0.0, 0.0, k / 2.0}); }
    /// V = (c/4) q^4.
    static Potential quartic(double c = 1.0) {
        return Potential({0.0, 0.0, 0.0, 0.0, c / 4.0});
    }

    const std::vector<double>& coefficients() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    double value(double q) const { return derivative(q, 0); }

    /// Exact polynomial derivative of the given order (0..3).
    double derivative(double q, int order) const;

    friend bool operator==(const Potential&, const Potential&) = default;

private:
    std::vector<double> coeffs_;
};

/// H(q,p) = p^2/(2m) + V(q) with m > 0.
class Hamiltonian {
public:
    Hamiltonian(double mass, Potential potential);

    double mass() const { return mass_; }
    const Potential& potential() const { return potential_; }
    double energy(PhasePoint z) const {
        return z.p * z.p / (2.0 * mass_) + potential_.value(z.q);
    }
    /// -dV/dq at q.
    double force(double q) const { return -potential_.derivative(q, 1); }

    friend bool operator==(const Hamiltonian&, const Hamiltonian&) = default;

private:
    double mass_;
    Potential potential_;
};

/// Rectangular phase-space domain with a uniform cell-centered grid.
struct GridSpec {
    double q_min = 0.0, q_max = 0.0;
    double p_min = 0.0, p_max = 0.0;
    int nq = 0, np = 0;

    double dq() const { return (q_max - q_min) / nq; }
    double dp() const { return (p_max - p_min) / np; }
    double q_center(int i) const { return q_min + (i + 0.5) * dq(); }
    double p_center(int j) const { return p_min + (j + 0.5) * dp(); }
    bool contains(PhasePoint z) const {
        return z.q >= q_min && z.q <= q_max && z.p >= p_min && z.p <= p_max;
    }

    /// Domain covering `widths` half-widths of the state in each direction.
    static GridSpec around(const GaussianState& s, double widths, int nq, int np);

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Nonnegative density samples at the cell centers of a GridSpec.
class GridDensity {
public:
    GridDensity(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    int nq() const { return spec_.nq; }
    int np() const { return spec_.np; }
    double value(int i, int j) const { return values_[static_cast<size_t>(i) * spec_.np + j]; }
    const std::vector<double>& values() const { return values_; }

    /// Midpoint-rule integral of the density over the domain.
    double total_mass() const;

    /// Copy scaled so total_mass() == 1.
    GridDensity normalized() const;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

/// A real-valued function of (q, p), carrying a stable name for reports.
class Observable {
public:
    using Fn = std::function<double(double q, double p)>;

    Observable(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    double operator()(double q, double p) const { return fn_(q, p); }
    const std::string& name() const { return name_; }

    static Observable one();
    static Observable position();
    static Observable momentum();
    static Observable position_squared();
    static Observable momentum_squared();
    static Observable centered_position_squared(double c);
    static Observable centered_momentum_squared(double c);
    static Observable energy(const Hamiltonian& h);

private:
    std::string name_;
    Fn fn_;
};

/// Sample the Gaussian at cell centers and renormalize to unit mass.
/// Throws NumericalError when the raw sampled mass is below 0.99, which
/// signals that the domain truncates the state.
GridDensity grid_from_state(const GaussianState& s, const GridSpec& spec);

/// Midpoint-rule value of the phase-space average of f.
double integrate_observable(const GridDensity& d, const Observable& f);

/// First and central second moments of the grid density.
MomentState grid_moments(const GridDensity& d);

}  // namespace phasesim

#endif
