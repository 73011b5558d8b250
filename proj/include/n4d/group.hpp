#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "n4d/grid.hpp"

namespace n4d {

using IMat4 = std::array<std::array<int, 4>, 4>;
using Label = std::array<int, 4>;  // oscillator indices per axis (p, i, k, l)

IMat4 imat_mul(const IMat4& a, const IMat4& b);
IMat4 imat_transpose(const IMat4& a);
IMat4 pair_distance_form();

struct GroupElement {
    IMat4 r{};
    int a_index = 0;  // R = A[a_index] * B[b_index]
    int b_index = 0;
    // R = d * sigma: sign[i] = d_ii, perm[i] = column of the nonzero in row i
    std::array<int, 4> sign{};
    std::array<int, 4> perm{};
};

class Group {
public:
    Group();  // builds and verifies the order-32 group
    int order() const { return static_cast<int>(el_.size()); }
    const GroupElement& operator[](int g) const { return el_[g]; }
    const std::vector<GroupElement>& elements() const { return el_; }
    int mul(int g1, int g2) const { return table_[g1][g2]; }
    int inverse(int g) const { return inv_[g]; }
    int identity() const { return 0; }
    int find(const IMat4& r) const;  // -1 if absent
    static const std::array<IMat4, 4>& set_A();
    static const std::array<IMat4, 8>& set_B();
    int from_ab(int a, int b) const { return ab_[a][b]; }

private:
    std::vector<GroupElement> el_;
    std::vector<std::vector<int>> table_;
    std::vector<int> inv_;
    std::array<std::array<int, 8>, 4> ab_{};
};

const Group& the_group();

struct Irrep {
    int q = 1, p = 1, d = 1;
    std::string label;  // e.g. "G15"
    std::vector<std::array<std::array<int, 2>, 2>> mats;  // per element, top-left d x d used
    std::vector<int> chi;
    int entry(int g, int i, int j) const { return mats[g][i][j]; }
    bool antisymmetric() const { return q == 2; }
};

class IrrepTable {
public:
    IrrepTable();  // builds from the induction formulas and verifies them
    int size() const { return static_cast<int>(irr_.size()); }
    const Irrep& operator[](int i) const { return irr_[i]; }
    const std::vector<Irrep>& all() const { return irr_; }
    int index_of(const std::string& label) const;  // -1 if unknown

    // Exact checks in integer arithmetic; empty string when all pass.
    std::string check_homomorphism() const;
    std::string check_unitarity() const;
    std::string check_character_orthogonality() const;

private:
    std::vector<Irrep> irr_;
};

const IrrepTable& the_irreps();

enum class PermutationSymmetry { symmetric, antisymmetric };
PermutationSymmetry classify_permutation(const std::string& label);

// P(R) v(x) = v(R^-1 x) on the lattice.
GridFunction scalar_transform_grid(const GroupElement& r, const GridFunction& f, const GridSpec& g);
// P(R) v(k) = sign * v(k')
std::pair<int, Label> scalar_transform_labels(const GroupElement& r, const Label& k);

struct LabelSpace {
    int m = 0;
    int size() const { return m * m * m * m; }
    int index(const Label& k) const { return k[0] + m * (k[1] + m * (k[2] + m * k[3])); }
    Label label(int idx) const {
        Label k{};
        for (int a = 0; a < 4; ++a) {
            k[a] = idx % m;
            idx /= m;
        }
        return k;
    }
};

struct KClass {
    Label rep{};
    std::vector<Label> members;  // sorted, rep first
    int size() const { return static_cast<int>(members.size()); }
};

std::vector<KClass> decompose_classes(int m);
long long class_count_formula(int m);

struct SparseVec {
    std::vector<std::pair<int, double>> c;  // (label index, coefficient), sorted by index
};

// Label-space projection P^{qp}_{ij} applied to a sparse vector.
SparseVec apply_projector(const Irrep& ir, int i, int j, const SparseVec& v, const LabelSpace& ls);

struct SymmetryAdaptedVector {
    int irrep = 0, row = 0, class_id = 0;
    SparseVec v;
};

struct ProjectedBasis {
    int m = 0;
    std::vector<KClass> classes;
    // blocks[irrep][row] -> vectors in deterministic (class, discovery) order
    std::vector<std::vector<std::vector<SymmetryAdaptedVector>>> blocks;
    // predicted multiplicities per class and irrep
    std::vector<std::vector<int>> class_mult;
    int count(int irrep) const { return static_cast<int>(blocks[irrep][0].size()); }
};

int class_multiplicity(const KClass& cls, const Irrep& ir);
ProjectedBasis project_basis(int m, double drop_tol = 1e-10);

void write_character_csv(std::ostream& os);
void write_multiplicity_csv(const ProjectedBasis& pb, std::ostream& os);

}  // namespace n4d
