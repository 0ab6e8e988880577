#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "phasesim/errors.hpp"
#include "phasesim/phase_space.hpp"

using namespace phasesim;

TEST_CASE("gaussian state rejects bad parameters") {
    CHECK_THROWS_AS(GaussianState(0.0, 0.0, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(GaussianState(0.0, 0.0, 1.0, -0.5), ValidationError);
    CHECK_THROWS_AS(GaussianState(std::nan(""), 0.0, 1.0, 1.0), ValidationError);
    CHECK_NOTHROW(GaussianState(2.0, -3.0, 0.1, 4.0));
}

TEST_CASE("gaussian density peaks at the center with height 1/(pi a b)") {
    GaussianState s(1.5, -0.5, 0.7, 1.3);
    const double peak = 1.0 / (std::numbers::pi * 0.7 * 1.3);
    CHECK(s.density_at({1.5, -0.5}) == doctest::Approx(peak).epsilon(1e-14));
    CHECK(s.density_at({1.5 + 0.7, -0.5}) ==
          doctest::Approx(peak * std::exp(-1.0)).epsilon(1e-14));
    CHECK(s.density_at({40.0, 40.0}) == doctest::Approx(0.0).epsilon(1e-300));
}

TEST_CASE("gaussian moments are (q0, p0, a^2/2, b^2/2, 0)") {
    GaussianState s(0.3, -1.2, 0.8, 2.0);
    MomentState m = s.moments();
    CHECK(m.mean_q == 0.3);
    CHECK(m.mean_p == -1.2);
    CHECK(m.var_q == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(m.var_p == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(m.cov_qp == 0.0);
}

TEST_CASE("gaussian variances match 1d quadrature of the marginal") {
    GaussianState s(0.0, 0.0, 1.1, 0.6);
    // Marginal in q is Normal(0, a^2/2); integrate q^2 against it.
    const double var_q = oracles::simpson(
        [&](double q) { return q * q * oracles::normal_pdf(q, 0.0, 0.5 * 1.1 * 1.1); },
        -12.0, 12.0, 4000);
    CHECK(s.moments().var_q == doctest::Approx(var_q).epsilon(1e-10));
}

TEST_CASE("potential strips trailing zeros and reports degree") {
    Potential v({1.0, 2.0, 0.0, 0.0});
    CHECK(v.degree() == 1);
    CHECK(v.coefficients().size() == 2);
    CHECK(Potential({5.0}).degree() == 0);
    CHECK(Potential({0.0, 0.0, 0.0}).degree() == 0);
}

TEST_CASE("potential enforces the degree cap") {
    std::vector<double> septic(8, 0.0);
    septic.back() = 1.0;
    CHECK_THROWS_AS(Potential{septic}, ValidationError);
    CHECK_NOTHROW(Potential({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0}));
    CHECK_THROWS_AS(Potential({0.0, 0.0, 0.0, 0.0, 1.0}, 3), ValidationError);
    CHECK_THROWS_AS(Potential(std::vector<double>{}), ValidationError);
}

TEST_CASE("potential derivatives match central differences") {
    std::mt19937_64 rng(20260823);
    std::uniform_real_distribution<double> coeff(-1.5, 1.5);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> cs(1 + static_cast<size_t>(rng() % 7));
        for (double& c : cs) c = coeff(rng);
        cs.back() += 0.25;  // keep the leading term away from zero
        Potential v(cs);
        const double q = point(rng);
        const double h = 1e-4;
        for (int order = 1; order <= Potential::kMaxDerivativeOrder; ++order) {
            const double lo = v.derivative(q - h, order - 1);
            const double hi = v.derivative(q + h, order - 1);
            const double fd = (hi - lo) / (2.0 * h);
            CHECK(v.derivative(q, order) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("potential derivative order is bounded") {
    Potential v = Potential::quartic(1.0);
    CHECK_THROWS_AS(v.derivative(0.5, 4), ValidationError);
    CHECK_THROWS_AS(v.derivative(0.5, -1), ValidationError);
    CHECK(v.derivative(2.0, 0) == doctest::Approx(4.0));
    CHECK(v.derivative(2.0, 3) == doctest::Approx(12.0));
}

TEST_CASE("potential factories") {
    CHECK(Potential::free_particle().degree() == 0);
    CHECK(Potential::free_particle().value(3.7) == 0.0);
    CHECK(Potential::harmonic(2.0).value(3.0) == doctest::Approx(9.0));
    CHECK(Potential::harmonic(2.0).derivative(3.0, 1) == doctest::Approx(6.0));
    CHECK(Potential::quartic(2.0).value(2.0) == doctest::Approx(8.0));
    CHECK(Potential::quartic(2.0).derivative(1.0, 3) == doctest::Approx(12.0));
}

TEST_CASE("hamiltonian energy and force") {
    Hamiltonian h(2.0, Potential::harmonic(8.0));
    CHECK(h.energy({1.0, 2.0}) == doctest::Approx(1.0 + 4.0));
    CHECK(h.force(1.5) == doctest::Approx(-12.0));
    CHECK_THROWS_AS(Hamiltonian(0.0, Potential::free_particle()), ValidationError);
    CHECK_THROWS_AS(Hamiltonian(-1.0, Potential::free_particle()), ValidationError);
}

TEST_CASE("grid spec geometry") {
    GridSpec g{-2.0, 2.0, -1.0, 3.0, 4, 8};
    CHECK(g.dq() == doctest::Approx(1.0));
    CHECK(g.dp() == doctest::Approx(0.5));
    CHECK(g.q_center(0) == doctest::Approx(-1.5));
    CHECK(g.q_center(3) == doctest::Approx(1.5));
    CHECK(g.p_center(0) == doctest::Approx(-0.75));
    CHECK(g.contains({0.0, 0.0}));
    CHECK(g.contains({-2.0, 3.0}));
    CHECK_FALSE(g.contains({2.0001, 0.0}));
    CHECK_FALSE(g.contains({0.0, -1.0001}));
}

TEST_CASE("grid spec around a state covers the requested widths") {
    GaussianState s(1.0, -2.0, 0.5, 2.0);
    GridSpec g = GridSpec::around(s, 6.0, 64, 64);
    CHECK(g.q_min == doctest::Approx(-2.0));
    CHECK(g.q_max == doctest::Approx(4.0));
    CHECK(g.p_min == doctest::Approx(-14.0));
    CHECK(g.p_max == doctest::Approx(10.0));
}

TEST_CASE("grid density validates its input") {
    GridSpec g{0.0, 1.0, 0.0, 1.0, 2, 2};
    CHECK_THROWS_AS(GridDensity(g, {1.0, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(GridDensity(g, {1.0, 1.0, -0.1, 1.0}), ValidationError);
    CHECK_THROWS_AS(GridDensity({0.0, 1.0, 0.0, 1.0, 1, 2}, {1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(GridDensity({1.0, 1.0, 0.0, 1.0, 2, 2}, std::vector<double>(4, 1.0)),
                    ValidationError);
}

TEST_CASE("uniform density mass equals the cell sum times cell area") {
    GridSpec g{-1.0, 1.0, -2.0, 2.0, 10, 20};
    GridDensity d(g, std::vector<double>(200, 0.125));
    CHECK(d.total_mass() == doctest::Approx(0.125 * 8.0).epsilon(1e-13));
    CHECK(d.normalized().total_mass() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("grid sampling of a gaussian normalizes to unit mass") {
    GaussianState s(0.0, 1.0, 1.0, 1.0);
    GridDensity d = grid_from_state(s, GridSpec{-8.0, 8.0, -7.0, 9.0, 128, 128});
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid sampling rejects a domain that truncates the state") {
    GaussianState s(0.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(grid_from_state(s, GridSpec{-1.0, 1.0, -1.0, 1.0, 64, 64}),
                    NumericalError);
}

TEST_CASE("observable integrals recover gaussian expectations") {
    GaussianState s(0.5, -1.0, 0.9, 1.4);
    GridDensity d = grid_from_state(s, GridSpec::around(s, 8.0, 256, 256));
    CHECK(integrate_observable(d, Observable::one()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate_observable(d, Observable::position()) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(integrate_observable(d, Observable::momentum()) ==
          doctest::Approx(-1.0).epsilon(1e-9));
    Hamiltonian h(1.0, Potential::free_particle());
    // <p^2/2> for Normal(-1, b^2/2) is (1 + 0.98)/2.
    CHECK(integrate_observable(d, Observable::energy(h)) ==
          doctest::Approx(0.5 * (1.0 + 0.5 * 1.4 * 1.4)).epsilon(1e-8));
}

TEST_CASE("grid moments agree with the exact gaussian moments") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> center(-1.0, 1.0);
    std::uniform_real_distribution<double> width(0.5, 1.5);
    for (int iter = 0; iter < 5; ++iter) {
        GaussianState s(center(rng), center(rng), width(rng), width(rng));
        GridDensity d = grid_from_state(s, GridSpec::around(s, 8.0, 256, 256));
        MomentState got = grid_moments(d);
        MomentState want = s.moments();
        CHECK(std::abs(got.mean_q - want.mean_q) < 1e-6);
        CHECK(std::abs(got.mean_p - want.mean_p) < 1e-6);
        CHECK(std::abs(got.var_q - want.var_q) < 1e-6);
        CHECK(std::abs(got.var_p - want.var_p) < 1e-6);
        CHECK(std::abs(got.cov_qp - want.cov_qp) < 1e-6);
    }
}

TEST_CASE("moment state covariance defect") {
    MomentState ok{0.0, 0.0, 1.0, 1.0, 0.5};
    CHECK(ok.covariance_defect() == doctest::Approx(-0.75));
    MomentState bad{0.0, 0.0, 0.1, 0.1, 0.5};
    CHECK(bad.covariance_defect() > 0.0);
}
