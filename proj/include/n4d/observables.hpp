#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "n4d/solver.hpp"

namespace n4d {

struct Peak {
    double position = 0.0;  // epsilon / omega
    double weight = 0.0;
};

struct DeltaSpectrum {
    std::vector<Peak> peaks;  // ascending position
    double eta = 0.01;

    double total_weight() const;
    // Lorentzian broadened curve eta/pi/((x - x0)^2 + eta^2) summed over peaks.
    std::vector<double> broadened(const std::vector<double>& x) const;
};

enum class Sector { symmetric, antisymmetric };
Sector sector_from_string(const std::string& s);
std::string to_string(Sector s);
bool in_sector(const Irrep& ir, Sector s);

// n x n matrix, entry (p, i) = sum_{k,l} psi_pikl^2.
Eigen::MatrixXd density_2d(const GridFunction& psi, int n);

struct NoninteractingDos {
    DeltaSpectrum g1, g2;
};
// One-particle levels nu_a + nu_b + 1 for a, b < level cap, and their self-convolution.
NoninteractingDos dos_noninteracting(const OscillatorBasis& basis, int level_cap);

// Peaks (E/omega, d_qp) of every solved row-1 block in the sector.
DeltaSpectrum dos_two_particle(const Solution& s, Sector sector);

// S^{n1 n2}_{m1 m2} for all n1, n2 < m.
Eigen::MatrixXd s_matrix(const OscillatorBasis& basis, const GridFunction& psi, int m1, int m2);
// Weight of one intermediate state (one row); sum over rows gives the peak weight.
double one_particle_weight(const OscillatorBasis& basis, const GridFunction& psi, int m1, int m2, Sector sector);
// Interacting one-particle DOS after placing a particle in (m1, m2); needs row partners for 2-D irreps.
DeltaSpectrum dos_one_particle_interacting(const Solution& s, int m1, int m2, Sector sector, int max_states = -1);

struct ReducedDensity {
    Eigen::MatrixXd rho;                // n^2 x n^2 over (p, i), p fastest
    std::vector<double> schmidt;        // descending
    double entropy = 0.0;
    double purity = 0.0;
    int schmidt_count = 0;              // values above 1e-6
    double trace = 0.0;
    double min_eigenvalue = 0.0;        // before clamping
};
// Reduce over (k, l) (first particle kept) or over (p, i) when keep_first is false.
ReducedDensity reduce_density(const GridFunction& psi, int n, bool keep_first = true);

struct StateSelector {
    std::string irrep;
    int row = 1;  // 1-based
    int r = 1;    // 1-based rank inside the block
};
StateSelector parse_selector(const std::string& s);  // "G23", "G23:2", "G23:1:3"
// Lattice state for a selector, or throws listing the available states.
GridFunction select_state(const Solution& s, const StateSelector& sel, double* energy = nullptr);

void write_density_csv(const Eigen::MatrixXd& rho2d, const GridSpec& g, std::ostream& os);
void write_peaks_csv(const DeltaSpectrum& d, std::ostream& os);
void write_broadened_csv(const DeltaSpectrum& d, double x0, double x1, int samples, std::ostream& os);
std::string entanglement_json(const StateSelector& sel, double e_over_omega, const ReducedDensity& rd);

}  // namespace n4d
