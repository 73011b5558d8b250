#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "n4d/grid.hpp"

namespace n4d {

// One-dimensional oscillator -d^2/dx^2 + omega^2 x^2 / 4 confined to [-b, b].
struct OscillatorSpec {
    double omega = 0.0;
    double b = 1.0;
    int n_levels = 8;

    static OscillatorSpec from_omega2_half(double omega2_half, double b, int levels);
};

struct OscillatorBasis {
    OscillatorSpec spec;
    std::vector<long double> nu;  // nu_0 < nu_1 < ...
    std::vector<int> parity;      // +1 even, -1 odd
    Eigen::MatrixXd phi;          // n x m grid samples, columns discretely normalized
    std::vector<double> norms;    // discrete norms of the unnormalized samples
    GridSpec grid;

    int m() const { return static_cast<int>(nu.size()); }
    double energy(int level) const { return spec.omega * static_cast<double>(nu[level] + 0.5L); }
};

struct KummerOptions {
    int max_terms = 2000;
    long double tol = 1e-16L;
};

long double kummer_M(long double a, long double b, long double z, const KummerOptions& opt = {});

// Boundary condition evaluated at x = b for the given parity (+1 even, -1 odd).
long double level_condition(long double nu, int parity, const OscillatorSpec& spec);

// Levels only (no sampling); phi left empty.
OscillatorBasis find_levels(const OscillatorSpec& spec);
// Analytic unnormalized wavefunction of the given level parameter and parity.
long double oscillator_wavefunction(long double nu, int parity, double omega, long double x);
void sample_wavefunctions(OscillatorBasis& basis, const GridSpec& grid);
OscillatorBasis make_basis(const OscillatorSpec& spec, const GridSpec& grid);

// E / omega of the product state k.
double noninteracting_energy(const std::array<int, 4>& k, const OscillatorBasis& basis);

void write_levels_csv(const OscillatorBasis& basis, std::ostream& os);

}  // namespace n4d
