#pragma once

#include <array>
#include <cstdint>

#include <boost/rational.hpp>

#include "n4d/grid.hpp"

namespace n4d {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// Parameters of the compact scheme
//   -(1/30h^2)(alpha B1 + beta B2 + gamma B3 + delta B4) psi
//       = (gamma + 2 delta + alpha' B1 + beta' B2 + gamma' B3 + delta' B4) f
// where Bj is the j-th neighbour difference operator.
struct StencilCoefficients {
    Rational gamma, delta, alpha, beta, eta;
    Rational alpha_p, beta_p, gamma_p, delta_p;

    // constant term of the right-hand side operator
    Rational rhs_identity() const { return gamma + Rational(2) * delta; }
};

StencilCoefficients solve_coefficient_systems(Rational gamma, Rational delta, Rational gamma_p);
StencilCoefficients default_coefficients();
Rational default_gamma_prime();

// Residuals (lhs - rhs) of the three equations of the first system followed by
// the three of the second system.
std::array<Rational, 6> coefficient_residuals(const StencilCoefficients& c);

// Index-level reference application of the neighbour operators.  Values outside
// the box are zero; the fourth-neighbour operator uses the odd-reflection
// convention along each axis at the two wall-adjacent cells.
GridFunction apply_neighbor_op(int j, const GridFunction& f, const GridSpec& g);
GridFunction apply_lhs_operator(const GridFunction& f, const StencilCoefficients& c, const GridSpec& g);
GridFunction apply_rhs_operator(const GridFunction& f, const StencilCoefficients& c, const GridSpec& g);

}  // namespace n4d
