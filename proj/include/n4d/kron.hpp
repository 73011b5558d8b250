#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "n4d/grid.hpp"
#include "n4d/stencil.hpp"

namespace n4d {

using SparseRM = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

// One summand z * A^{e_l} (x) A^{e_k} (x) A^{e_i} (x) A^{e_p}.  Exponents are
// stored per grid axis: pow[0] acts on p (fastest index), pow[3] on l.
struct PolyTerm {
    Rational z;
    std::array<int, 4> pow{};
    double value() const { return to_double(z); }
    int total_degree() const { return pow[0] + pow[1] + pow[2] + pow[3]; }
};

class DirectPolyMatrix {
public:
    DirectPolyMatrix() = default;
    explicit DirectPolyMatrix(int n) : n_(n) {}

    int n() const { return n_; }
    std::size_t dim() const { return static_cast<std::size_t>(n_) * n_ * n_ * n_; }
    const std::vector<PolyTerm>& terms() const { return terms_; }
    int max_power() const;

    // Adds z * prod_axis A^pow[axis]; like exponents are merged, zero terms dropped.
    void add_term(Rational z, std::array<int, 4> pow);
    DirectPolyMatrix& operator+=(const DirectPolyMatrix& o);
    DirectPolyMatrix scaled(Rational s) const;

    GridFunction matvec(const GridFunction& f) const;
    // Eigenvalue on the sine product labelled by k (1-based per axis).
    double eigenvalue(const std::array<int, 4>& k) const;

private:
    int n_ = 0;
    std::vector<PolyTerm> terms_;
};

DirectPolyMatrix operator+(DirectPolyMatrix a, const DirectPolyMatrix& b);

Eigen::MatrixXd build_A(int n);
Eigen::MatrixXd build_Aprime(int n);
// Per-axis tridiagonal application y = A x along one grid axis.
void apply_A_axis(const GridFunction& x, GridFunction& y, int n, int axis);

DirectPolyMatrix build_Mi(int i, int n);
DirectPolyMatrix build_M(int n);
DirectPolyMatrix build_N(int n, Rational gamma_p);
// Operators of a general coefficient set: lhs is the bracket multiplying
// -(1/30h^2), rhs the operator applied to f.
DirectPolyMatrix build_lhs_bracket(int n, const StencilCoefficients& c);
DirectPolyMatrix build_rhs(int n, const StencilCoefficients& c);

struct CsrOptions {
    double budget_bytes = 2.0 * 1024.0 * 1024.0 * 1024.0;
};

SparseRM assemble_csr(const DirectPolyMatrix& m, const CsrOptions& opt = {});
Eigen::MatrixXd assemble_dense(const DirectPolyMatrix& m);
// Bytes needed by the triplet list used during assembly.
double csr_assembly_estimate(const DirectPolyMatrix& m);
void dump_coordinate(const SparseRM& m, std::ostream& os);

struct NnzReport {
    int n = 0;
    std::array<std::int64_t, 4> mi{};
    std::int64_t m = 0;
    std::int64_t nmat = 0;
    std::int64_t lhs = 0;  // h^-2 M + N diag(U) has the pattern of N
    std::int64_t total() const { return lhs + nmat; }
    // compressed-row storage of value plus 64-bit column index per entry, in GiB
    double memory_gib() const;
    double leading_m() const { return 65.0 * n * double(n) * n * n; }
    double leading_n() const { return 89.0 * n * double(n) * n * n; }
};

NnzReport nnz_formulas(int n);
NnzReport nnz_counted(int n, const CsrOptions& opt = {});

// Closed-form spectra on sine products.
class SpectralOracle {
public:
    SpectralOracle(int n, Rational gamma_p = default_gamma_prime()) : n_(n), gp_(gamma_p) {}
    enum class Which { M1, M2, M3, M4, M, N, Laplacian };

    int n() const { return n_; }
    double omega(int k) const;
    double mi(int i, const std::array<int, 4>& k) const;
    double theta(const std::array<int, 4>& k) const;
    double lambda(const std::array<int, 4>& k) const;
    double spectrum(Which w, const std::array<int, 4>& k) const;

    double cos1() const;
    double theta_corner(int i) const;   // i = 1..5
    double lambda_corner(int i) const;  // i = 1..5
    double theta_min() const;
    double theta_max() const;
    double lambda_min() const;
    double lambda_max() const;
    double ground_state() const;  // (n+1)^2 theta_min / lambda_max

private:
    int n_;
    Rational gp_;
};

double ground_state_asymptotic_error(int n);  // (703/60480) pi^6 / n^6

}  // namespace n4d
