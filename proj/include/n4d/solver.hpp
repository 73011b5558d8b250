#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "n4d/group.hpp"
#include "n4d/kron.hpp"
#include "n4d/oscillator.hpp"

namespace n4d {

enum class PencilMode {
    nonsymmetric,  // reduce with the Cholesky factor of B, solve the general real eigenproblem
    symmetrized,   // replace H by (H + H^T)/2 and solve the symmetric definite problem
};

std::string to_string(PencilMode m);
PencilMode pencil_mode_from_string(const std::string& s);

// Value of the pair interaction where both particles share a lattice site:
// c / (factor * h).  "hard_core" approximates the infinite-wall limit, with
// energies converged to about 1e-4 omega; "half_cell" uses the half-spacing distance.
struct CoincidenceRule {
    std::string name = "hard_core";
    double factor = 1e-6;

    static CoincidenceRule hard_core() { return {"hard_core", 1e-6}; }
    static CoincidenceRule half_cell() { return {"half_cell", 0.5}; }
    // "hard_core", "half_cell" or a positive factor
    static CoincidenceRule parse(const std::string& s);
    std::string describe() const;
};

struct ProblemConfig {
    GridSpec grid{30, 1.0};
    double omega2_half = 500.0;
    int m = 8;
    double coulomb_c = 0.0;
    Rational gamma_p = default_gamma_prime();
    CoincidenceRule coincidence;
    PencilMode pencil = PencilMode::nonsymmetric;
    int threads = 1;
    double memory_budget = 2.0 * 1024.0 * 1024.0 * 1024.0;

    double omega() const;
    OscillatorSpec oscillator() const;
    void validate() const;
};

GridFunction build_potential_grid(const ProblemConfig& cfg, bool include_harmonic = true, bool include_pair = true);

// Operators restricted to the span of the product states v(k), indexed by the
// label space ordering (k1 fastest).
struct SubspaceOperators {
    int m = 0;
    double h = 0.0;
    Eigen::MatrixXd H0;  // h^-2 <v|M|v'> + <v|N diag(U_harmonic)|v'>
    Eigen::MatrixXd B;   // <v|N|v'>
    Eigen::MatrixXd C;   // <v|N diag(V_pair)|v'>, empty when the interaction is off
    bool has_pair() const { return C.size() > 0; }
    Eigen::MatrixXd H() const { return has_pair() ? Eigen::MatrixXd(H0 + C) : H0; }
};

enum class StreamKernel {
    extended_basis,  // contract against A^s phi per axis, GEMM based
    lazy_matvec,     // apply N to each streamed vector lazily, then contract against phi
};

struct StreamOptions {
    StreamKernel kernel = StreamKernel::extended_basis;
    bool use_symmetry = true;  // stream class representatives only
    int threads = 1;
};

// 1-D Gram matrices G_s = phi^T A^s phi and D_s = phi^T A^s diag(u) phi.
struct AxisGrams {
    std::vector<Eigen::MatrixXd> G, D;
};
AxisGrams axis_grams(const OscillatorBasis& basis, double omega, int max_power);

SubspaceOperators assemble_subspace_operators(const ProblemConfig& cfg, const OscillatorBasis& basis,
                                              const StreamOptions& opt = {});
// <v(k)| N diag(w) |v(k')> for all k, k' by streaming columns.
Eigen::MatrixXd stream_weighted_operator(const ProblemConfig& cfg, const OscillatorBasis& basis,
                                         const GridFunction& w, const StreamOptions& opt);
// Expand a label-space coefficient vector into a lattice function.
GridFunction expand_labels(const OscillatorBasis& basis, const Eigen::VectorXd& a);
// Contract a lattice function against all product states.
Eigen::VectorXd contract_labels(const OscillatorBasis& basis, const GridFunction& f);

struct BlockPencil {
    int irrep = 0, row = 0;
    Eigen::MatrixXd H, B;
    double asymmetry = 0.0;  // max |H - H^T| before any symmetrization
};

// Dense label-space coefficient matrix of the block's symmetry-adapted vectors.
Eigen::MatrixXd coefficient_matrix(const std::vector<SymmetryAdaptedVector>& vecs, int label_dim);
BlockPencil assemble_block_pencil(int irrep, int row, const SubspaceOperators& ops, const ProjectedBasis& pb);

struct BlockSolution {
    int irrep = 0, row = 0;
    std::vector<double> energies;  // E (not divided by omega), ascending
    Eigen::MatrixXd vectors;       // columns: coefficients over the block vectors, x^T B x = 1
    double asymmetry = 0.0;
    double max_imag = 0.0;  // largest imaginary part met by the nonsymmetric reduction
    double min_b_eig = 0.0;
};

BlockSolution solve_block(const BlockPencil& pencil, PencilMode mode);
// Spectrum of the unreduced label-space pencil, ascending.
std::vector<double> dense_subspace_spectrum(const SubspaceOperators& ops, PencilMode mode);

struct SolveOptions {
    std::vector<std::string> irreps;  // empty: all
    bool both_rows = false;           // also solve row 2 of two-dimensional irreps
    StreamOptions stream;
};

struct Solution {
    ProblemConfig cfg;
    OscillatorBasis basis;
    std::shared_ptr<const ProjectedBasis> pb;
    std::shared_ptr<const SubspaceOperators> ops;
    std::vector<BlockSolution> blocks;  // canonical order: irrep order, then row
    double seconds_basis = 0, seconds_projection = 0, seconds_assembly = 0, seconds_solve = 0;

    const BlockSolution* find(int irrep, int row) const;
    double omega() const { return cfg.omega(); }
};

Solution solve_problem(const ProblemConfig& cfg, const SolveOptions& opt = {});
// Re-solve using already assembled operators (no streaming).
Solution solve_with_operators(const ProblemConfig& cfg, OscillatorBasis basis, std::shared_ptr<const ProjectedBasis> pb,
                              std::shared_ptr<const SubspaceOperators> ops, const SolveOptions& opt = {});

// Lattice wavefunction of eigenvector r of a block, normalized so sum psi^2 = 1.
GridFunction block_state(const Solution& s, const BlockSolution& b, int r);
Eigen::VectorXd block_state_labels(const Solution& s, const BlockSolution& b, int r);

// Exact continuum energies (E/omega) of the block's label space at c = 0, ascending.
std::vector<double> exact_block_energies(const ProjectedBasis& pb, const OscillatorBasis& basis, int irrep);

struct DegenerateLevel {
    double e_over_omega = 0.0;
    std::vector<std::string> irreps;
    int degeneracy = 0;
};
std::vector<DegenerateLevel> degeneracy_report(const Solution& s, double tol, double e_max);

struct FitResult {
    double slope = 0.0;  // b in E_inf - E_n ~ a / n^b
    double stderr_ = 0.0;
    double intercept = 0.0;
    bool monotone = true;
    bool all_positive = true;
};
FitResult fit_power_law(const std::vector<double>& n, const std::vector<double>& err);

struct ConvergenceStudy {
    std::vector<int> ns;
    std::vector<int> levels;                      // 1-based Gamma11 ranks
    std::vector<std::vector<double>> energies;    // [level][n] E/omega
    std::vector<double> exact;                    // [level]
    std::vector<FitResult> fits;                  // [level]
};
ConvergenceStudy run_convergence_study(const ProblemConfig& base, const std::vector<int>& levels,
                                       const std::vector<int>& ns);
// Same fit applied to the closed-form discrete Laplacian ground level.
FitResult laplacian_ground_convergence(const std::vector<int>& ns);

void write_levels_csv(const Solution& s, std::ostream& os);
std::string manifest_json(const Solution& s, double wall_seconds);

}  // namespace n4d
