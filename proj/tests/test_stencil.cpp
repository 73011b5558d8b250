#include <doctest.h>

#include <cmath>
#include <random>

#include "n4d/kron.hpp"
#include "n4d/stencil.hpp"

using namespace n4d;

TEST_CASE("coefficient systems have the expected solution") {
    auto c = default_coefficients();
    CHECK(c.alpha == Rational(12));
    CHECK(c.beta == Rational(1));
    CHECK(c.eta == Rational(60));
    CHECK(c.gamma_p == Rational(23, 3840));
    CHECK(c.alpha_p == Rational(12) * Rational(23, 3840) - Rational(1, 30));
    CHECK(c.delta_p == Rational(-1, 240));
    for (auto& r : coefficient_residuals(c)) CHECK(r.numerator() == 0);
}

TEST_CASE("residuals vanish for other gamma, delta, gamma'") {
    for (auto [g, d, gp] : {std::tuple{Rational(2), Rational(1), Rational(1, 100)},
                            std::tuple{Rational(1), Rational(3, 7), Rational(0)}}) {
        auto c = solve_coefficient_systems(g, d, gp);
        for (auto& r : coefficient_residuals(c)) CHECK(r.numerator() == 0);
    }
    // a perturbed alpha breaks the first system
    auto c = default_coefficients();
    c.alpha += 1;
    CHECK(coefficient_residuals(c)[0].numerator() != 0);
}

TEST_CASE("neighbor sums count the right shells") {
    // in the interior a constant field gives the shell sizes 8, 24, 32, 16 minus the count
    GridSpec g(7, 1.0);
    GridFunction one(g.size(), 1.0);
    const std::size_t mid = g.flat(4, 4, 4, 4);
    CHECK(apply_neighbor_op(1, one, g)[mid] == doctest::Approx(0.0));
    CHECK(apply_neighbor_op(2, one, g)[mid] == doctest::Approx(0.0));
    CHECK(apply_neighbor_op(3, one, g)[mid] == doctest::Approx(0.0));
    CHECK(apply_neighbor_op(4, one, g)[mid] == doctest::Approx(0.0));
    // at a corner only the inward neighbours remain: 4 - 8, 6 - 24, 4 - 32
    const std::size_t corner = g.flat(1, 1, 1, 1);
    CHECK(apply_neighbor_op(1, one, g)[corner] == doctest::Approx(4.0 - 8.0));
    CHECK(apply_neighbor_op(2, one, g)[corner] == doctest::Approx(6.0 - 24.0));
    CHECK(apply_neighbor_op(3, one, g)[corner] == doctest::Approx(4.0 - 32.0));
}

TEST_CASE("stencil sums agree with the direct polynomial form") {
    const int n = 6;
    GridSpec g(n, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    GridFunction f(g.size());
    for (double& x : f) x = u(rng);
    for (int i = 1; i <= 4; ++i) {
        GridFunction a = apply_neighbor_op(i, f, g), b = build_Mi(i, n).matvec(f);
        double e = 0;
        for (std::size_t k = 0; k < f.size(); ++k) e = std::max(e, std::fabs(a[k] - b[k]));
        CHECK(e < 1e-12);
    }
    auto c = default_coefficients();
    GridFunction a = apply_lhs_operator(f, c, g), b = build_lhs_bracket(n, c).matvec(f);
    const double s = -1.0 / (30.0 * g.h() * g.h());
    double e = 0;
    for (std::size_t k = 0; k < f.size(); ++k) e = std::max(e, std::fabs(a[k] - s * b[k]));
    CHECK(e < 1e-9);
    GridFunction ra = apply_rhs_operator(f, c, g), rb = build_rhs(n, c).matvec(f);
    e = 0;
    for (std::size_t k = 0; k < f.size(); ++k) e = std::max(e, std::fabs(ra[k] - rb[k]));
    CHECK(e < 1e-12);
}

TEST_CASE("truncation error of the scheme is sixth order") {
    // psi is the lowest Dirichlet mode of the box, f = -lap psi = 4 (pi/2)^2 psi.
    // The local residual L psi - R f should shrink like h^6.
    auto residual = [](int n) {
        GridSpec g(n, 1.0);
        GridFunction psi(g.size()), f(g.size());
        const double k = M_PI / 2.0;
        for (std::size_t mu = 0; mu < g.size(); ++mu) {
            auto q = g.unflat(mu);
            double v = 1;
            for (int a = 0; a < 4; ++a) v *= std::cos(k * g.x(q[a]));
            psi[mu] = v;
            f[mu] = 4.0 * k * k * v;
        }
        auto c = default_coefficients();
        GridFunction l = apply_lhs_operator(psi, c, g), r = apply_rhs_operator(f, c, g);
        double e = 0;
        for (std::size_t mu = 0; mu < g.size(); ++mu) e = std::max(e, std::fabs(l[mu] - r[mu]));
        return e;
    };
    double e1 = residual(9), e2 = residual(19);
    double order = std::log(e1 / e2) / std::log(20.0 / 10.0);
    CHECK(order > 5.5);
}
