#include "n4d/stencil.hpp"

#include <stdexcept>

namespace n4d {

StencilCoefficients solve_coefficient_systems(Rational gamma, Rational delta, Rational gamma_p) {
    StencilCoefficients c;
    c.gamma = gamma;
    c.delta = delta;
    c.alpha = Rational(12) * gamma;
    c.beta = gamma + Rational(8) * delta;
    c.eta = Rational(60) * gamma;
    c.gamma_p = gamma_p;
    c.alpha_p = Rational(12) * gamma_p - gamma / Rational(30);
    c.beta_p = Rational(-4) * gamma_p + gamma / Rational(36) + Rational(2) * delta / Rational(45);
    c.delta_p = -gamma / Rational(240) - delta / Rational(180);
    return c;
}

Rational default_gamma_prime() { return Rational(23, 3840); }

StencilCoefficients default_coefficients() {
    return solve_coefficient_systems(Rational(1), Rational(0), default_gamma_prime());
}

std::array<Rational, 6> coefficient_residuals(const StencilCoefficients& c) {
    const Rational& a = c.alpha;
    const Rational& b = c.beta;
    const Rational& g = c.gamma;
    const Rational& d = c.delta;
    const Rational& e = c.eta;
    Rational s72 = a + 6 * b + 12 * g + 72 * d;
    std::array<Rational, 6> r;
    r[0] = 2 * (a + 6 * b + 12 * g + 24 * d) - (12 * b + 48 * g + 48 * d);
    r[1] = 3 * s72 - (30 * b + 120 * g + 120 * d - e);
    r[2] = 6 * s72 - (360 * g + 720 * d - 3 * e);

    const Rational& ap = c.alpha_p;
    const Rational& bp = c.beta_p;
    const Rational& gp = c.gamma_p;
    const Rational& dp = c.delta_p;
    Rational q = g / Rational(30) + 2 * d / Rational(15);
    r[3] = ap + 6 * bp + 12 * gp + 12 * dp - (g / Rational(12) + d / Rational(5));
    r[4] = ap + 6 * bp + 12 * gp + 24 * dp - q;
    r[5] = 12 * bp + 48 * gp + 48 * dp - (2 * q + g / Rational(15));
    return r;
}

namespace {

// Sum over all sites displaced by exactly one step along each axis in `axes`
// (every sign combination).  Off-grid sites contribute zero.
void add_diagonal_shell(const GridFunction& f, const GridSpec& g, const std::array<int, 4>& q,
                        const int* axes, int count, double& acc) {
    const int n = g.n;
    int combos = 1 << count;
    for (int s = 0; s < combos; ++s) {
        std::array<int, 4> r = q;
        bool inside = true;
        for (int t = 0; t < count; ++t) {
            r[axes[t]] += (s >> t) & 1 ? 1 : -1;
            if (r[axes[t]] < 1 || r[axes[t]] > n) {
                inside = false;
                break;
            }
        }
        if (inside) acc += f[g.flat(r[0], r[1], r[2], r[3])];
    }
}

}  // namespace

GridFunction apply_neighbor_op(int j, const GridFunction& f, const GridSpec& g) {
    if (j < 1 || j > 4) throw std::invalid_argument("apply_neighbor_op: j must be in 1..4");
    if (f.size() != g.size()) throw std::invalid_argument("apply_neighbor_op: size mismatch");
    static const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    static const int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    static const int all4[4] = {0, 1, 2, 3};
    const int n = g.n;
    GridFunction out(f.size(), 0.0);
    for (std::size_t mu = 0; mu < f.size(); ++mu) {
        auto q = g.unflat(mu);
        double acc = 0.0;
        switch (j) {
        case 1:
            for (int a = 0; a < 4; ++a) add_diagonal_shell(f, g, q, &all4[a], 1, acc);
            acc -= 8.0 * f[mu];
            break;
        case 2:
            for (auto& p : pairs) add_diagonal_shell(f, g, q, p, 2, acc);
            acc -= 24.0 * f[mu];
            break;
        case 3:
            for (auto& t : triples) add_diagonal_shell(f, g, q, t, 3, acc);
            acc -= 32.0 * f[mu];
            break;
        case 4: {
            add_diagonal_shell(f, g, q, all4, 4, acc);
            for (int a = 0; a < 4; ++a) {
                for (int s : {-2, 2}) {
                    auto r = q;
                    r[a] += s;
                    if (r[a] >= 1 && r[a] <= n) acc += f[g.flat(r[0], r[1], r[2], r[3])];
                }
                // ghost value two cells out of the box mirrors the first interior cell
                if (q[a] == 1) acc -= f[mu];
                if (q[a] == n) acc -= f[mu];
            }
            acc -= 24.0 * f[mu];
            break;
        }
        }
        out[mu] = acc;
    }
    return out;
}

GridFunction apply_lhs_operator(const GridFunction& f, const StencilCoefficients& c, const GridSpec& g) {
    const double h = g.h();
    const double s = -1.0 / (30.0 * h * h);
    const double w[4] = {to_double(c.alpha), to_double(c.beta), to_double(c.gamma), to_double(c.delta)};
    GridFunction out(f.size(), 0.0);
    for (int j = 1; j <= 4; ++j) {
        if (w[j - 1] == 0.0) continue;
        auto bj = apply_neighbor_op(j, f, g);
        for (std::size_t mu = 0; mu < f.size(); ++mu) out[mu] += s * w[j - 1] * bj[mu];
    }
    return out;
}

GridFunction apply_rhs_operator(const GridFunction& f, const StencilCoefficients& c, const GridSpec& g) {
    const double w[4] = {to_double(c.alpha_p), to_double(c.beta_p), to_double(c.gamma_p), to_double(c.delta_p)};
    const double w0 = to_double(c.rhs_identity());
    GridFunction out(f.size());
    for (std::size_t mu = 0; mu < f.size(); ++mu) out[mu] = w0 * f[mu];
    for (int j = 1; j <= 4; ++j) {
        if (w[j - 1] == 0.0) continue;
        auto bj = apply_neighbor_op(j, f, g);
        for (std::size_t mu = 0; mu < f.size(); ++mu) out[mu] += w[j - 1] * bj[mu];
    }
    return out;
}

}  // namespace n4d
