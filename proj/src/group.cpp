#include "n4d/group.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace n4d {

IMat4 imat_mul(const IMat4& a, const IMat4& b) {
    IMat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

IMat4 imat_transpose(const IMat4& a) {
    IMat4 t{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
    return t;
}

IMat4 pair_distance_form() {
    return IMat4{{{1, 0, -1, 0}, {0, 1, 0, -1}, {-1, 0, 1, 0}, {0, -1, 0, 1}}};
}

namespace {

IMat4 perm_matrix(std::array<int, 4> cols) {
    IMat4 r{};
    for (int i = 0; i < 4; ++i) r[i][cols[i]] = 1;
    return r;
}

IMat4 block_diag2(const std::array<std::array<int, 2>, 2>& b) {
    IMat4 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = r[i + 2][j + 2] = b[i][j];
    return r;
}

IMat4 negate(IMat4 r) {
    for (auto& row : r)
        for (auto& e : row) e = -e;
    return r;
}

using I2 = std::array<std::array<int, 2>, 2>;
const I2 kE2{{{1, 0}, {0, 1}}};
const I2 kB2{{{0, 1}, {1, 0}}};
const I2 kB3{{{0, -1}, {1, 0}}};
const I2 kB4{{{1, 0}, {0, -1}}};

I2 neg2(I2 m) {
    for (auto& r : m)
        for (auto& e : r) e = -e;
    return m;
}

I2 mul2(const I2& a, const I2& b) {
    I2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

}  // namespace

const std::array<IMat4, 4>& Group::set_A() {
    static const std::array<IMat4, 4> a = {perm_matrix({0, 1, 2, 3}), perm_matrix({2, 3, 0, 1}),
                                           perm_matrix({2, 1, 0, 3}), perm_matrix({0, 3, 2, 1})};
    return a;
}

const std::array<IMat4, 8>& Group::set_B() {
    static const std::array<IMat4, 8> b = [] {
        std::array<IMat4, 8> r;
        r[0] = block_diag2(kE2);
        r[1] = block_diag2(kB2);
        r[2] = block_diag2(kB3);
        r[3] = block_diag2(kB4);
        for (int i = 0; i < 4; ++i) r[i + 4] = negate(r[i]);
        return r;
    }();
    return b;
}

Group::Group() {
    const auto& A = set_A();
    const auto& B = set_B();
    std::set<IMat4> seen;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 8; ++b) {
            GroupElement e;
            e.r = imat_mul(A[a], B[b]);
            e.a_index = a;
            e.b_index = b;
            if (!seen.insert(e.r).second) throw std::logic_error("Group: decomposition R_a R_b is not unique");
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    if (e.r[i][j] != 0) {
                        e.perm[i] = j;
                        e.sign[i] = e.r[i][j];
                    }
            ab_[a][b] = static_cast<int>(el_.size());
            el_.push_back(e);
        }
    const int g = order();
    table_.assign(g, std::vector<int>(g, -1));
    inv_.assign(g, -1);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            int k = find(imat_mul(el_[i].r, el_[j].r));
            if (k < 0) throw std::logic_error("Group: not closed under multiplication");
            table_[i][j] = k;
            if (k == 0) inv_[i] = j;
        }
    for (int i = 0; i < g; ++i)
        if (inv_[i] < 0) throw std::logic_error("Group: missing inverse");
}

int Group::find(const IMat4& r) const {
    for (std::size_t i = 0; i < el_.size(); ++i)
        if (el_[i].r == r) return static_cast<int>(i);
    return -1;
}

const Group& the_group() {
    static const Group g;
    return g;
}

namespace {

const int kChiA[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
// conjugacy class of each member of B: C1 = {R1}, C2 = {R4, R8}, C3 = {R5}, C4 = {R3, R7}, C5 = {R2, R6}
const int kClassOfB[8] = {0, 4, 3, 1, 2, 4, 3, 1};
const int kChiB[4][5] = {{1, 1, 1, 1, 1}, {1, 1, 1, -1, -1}, {1, -1, 1, 1, -1}, {1, -1, 1, -1, 1}};

I2 gamma_B5(int b) {
    static const I2 base[4] = {kE2, kB2, kB3, kB4};
    return b < 4 ? base[b] : neg2(base[b - 4]);
}

// members R1, R4, R5, R8 of B form the little group; as signed permutations
// they coincide with R1, R4, R3, R2 of A, whose characters are reused
int little_group_index(int b) {
    switch (b) {
    case 0: return 0;
    case 3: return 3;
    case 4: return 2;
    case 7: return 1;
    }
    return -1;
}

}  // namespace

IrrepTable::IrrepTable() {
    const Group& G = the_group();
    const auto& B = Group::set_B();
    const int R7 = 6;
    auto b_index_of = [&](const IMat4& m) {
        for (int b = 0; b < 8; ++b)
            if (B[b] == m) return b;
        return -1;
    };
    const IMat4 r7 = B[R7], r7inv = imat_transpose(B[R7]);
    for (int q : {1, 2, 4}) {
        int pmax = q == 2 ? 4 : 5;
        for (int p = 1; p <= pmax; ++p) {
            Irrep ir;
            ir.q = q;
            ir.p = p;
            ir.d = (q == 2 || p == 5) ? 2 : 1;
            ir.label = "G" + std::to_string(q) + std::to_string(p);
            for (int g = 0; g < G.order(); ++g) {
                const int a = G[g].a_index, b = G[g].b_index;
                I2 m{};
                if (q != 2) {
                    if (p <= 4) {
                        m[0][0] = kChiA[q - 1][a] * kChiB[p - 1][kClassOfB[b]];
                    } else {
                        I2 g5 = gamma_B5(b);
                        for (auto& row : g5)
                            for (auto& e : row) e *= kChiA[q - 1][a];
                        m = g5;
                    }
                } else {
                    const IMat4& rb = B[b];
                    auto chi_little = [&](const IMat4& x) {
                        int bi = b_index_of(x);
                        int s = bi < 0 ? -1 : little_group_index(bi);
                        return s < 0 ? 0 : kChiA[p - 1][s];
                    };
                    m[0][0] = kChiA[1][a] * chi_little(rb);
                    m[0][1] = kChiA[1][a] * chi_little(imat_mul(rb, r7inv));
                    m[1][0] = kChiA[2][a] * chi_little(imat_mul(r7, rb));
                    m[1][1] = kChiA[2][a] * chi_little(imat_mul(imat_mul(r7, rb), r7inv));
                }
                ir.mats.push_back(m);
                ir.chi.push_back(ir.d == 1 ? m[0][0] : m[0][0] + m[1][1]);
            }
            irr_.push_back(ir);
        }
    }
    for (const std::string& err : {check_homomorphism(), check_unitarity()})
        if (!err.empty()) throw std::logic_error("IrrepTable: " + err);
}

int IrrepTable::index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (irr_[i].label == label) return i;
    return -1;
}

std::string IrrepTable::check_homomorphism() const {
    const Group& G = the_group();
    for (auto& ir : irr_)
        for (int g1 = 0; g1 < G.order(); ++g1)
            for (int g2 = 0; g2 < G.order(); ++g2) {
                I2 prod = mul2(ir.mats[g1], ir.mats[g2]);
                const I2& rhs = ir.mats[G.mul(g1, g2)];
                for (int i = 0; i < ir.d; ++i)
                    for (int j = 0; j < ir.d; ++j)
                        if (prod[i][j] != rhs[i][j]) {
                            std::ostringstream os;
                            os << ir.label << " is not a homomorphism at elements " << g1 << "," << g2;
                            return os.str();
                        }
            }
    return {};
}

std::string IrrepTable::check_unitarity() const {
    for (auto& ir : irr_)
        for (std::size_t g = 0; g < ir.mats.size(); ++g)
            for (int i = 0; i < ir.d; ++i)
                for (int j = 0; j < ir.d; ++j) {
                    int s = 0;
                    for (int k = 0; k < ir.d; ++k) s += ir.mats[g][k][i] * ir.mats[g][k][j];
                    if (s != (i == j ? 1 : 0)) {
                        std::ostringstream os;
                        os << ir.label << " is not orthogonal at element " << g;
                        return os.str();
                    }
                }
    return {};
}

std::string IrrepTable::check_character_orthogonality() const {
    const int g = the_group().order();
    for (int a = 0; a < size(); ++a)
        for (int b = 0; b < size(); ++b) {
            int s = 0;
            for (int e = 0; e < g; ++e) s += irr_[a].chi[e] * irr_[b].chi[e];
            if (s != (a == b ? g : 0)) return "characters of " + irr_[a].label + " and " + irr_[b].label + " not orthogonal";
        }
    return {};
}

const IrrepTable& the_irreps() {
    static const IrrepTable t;
    return t;
}

PermutationSymmetry classify_permutation(const std::string& label) {
    int i = the_irreps().index_of(label);
    if (i < 0) throw std::invalid_argument("classify_permutation: unknown irrep label " + label);
    return the_irreps()[i].antisymmetric() ? PermutationSymmetry::antisymmetric : PermutationSymmetry::symmetric;
}

GridFunction scalar_transform_grid(const GroupElement& r, const GridFunction& f, const GridSpec& g) {
    if (f.size() != g.size()) throw std::invalid_argument("scalar_transform_grid: size mismatch");
    // (R^-1 x)_i = s_i x_{c(i)} where column i of R holds s_i in row c(i)
    std::array<int, 4> row{}, s{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (r.r[j][i] != 0) {
                row[i] = j;
                s[i] = r.r[j][i];
            }
    GridFunction out(f.size());
    const int n = g.n;
    for (std::size_t mu = 0; mu < f.size(); ++mu) {
        auto q = g.unflat(mu);
        std::array<int, 4> src{};
        for (int i = 0; i < 4; ++i) src[i] = s[i] > 0 ? q[row[i]] : n + 1 - q[row[i]];
        out[mu] = f[g.flat(src[0], src[1], src[2], src[3])];
    }
    return out;
}

std::pair<int, Label> scalar_transform_labels(const GroupElement& r, const Label& k) {
    int sign = 1;
    Label kp{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (r.r[j][i] != 0) {
                if (r.r[j][i] < 0 && (k[i] & 1)) sign = -sign;
                kp[j] = k[i];
            }
    return {sign, kp};
}

std::vector<KClass> decompose_classes(int m) {
    if (m < 1) throw std::invalid_argument("decompose_classes: m must be >= 1");
    const Group& G = the_group();
    LabelSpace ls{m};
    std::vector<char> done(ls.size(), 0);
    std::vector<KClass> out;
    for (int idx = 0; idx < ls.size(); ++idx) {
        if (done[idx]) continue;
        Label k = ls.label(idx);
        std::set<Label> orbit;
        for (auto& e : G.elements()) orbit.insert(scalar_transform_labels(e, k).second);
        KClass c;
        for (auto& x : orbit) {
            c.members.push_back(x);
            done[ls.index(x)] = 1;
        }
        c.rep = c.members.front();
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const KClass& a, const KClass& b) { return a.rep < b.rep; });
    return out;
}

long long class_count_formula(int m) {
    auto C = [](long long a, int b) {
        long long r = 1;
        for (int i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
        return r;
    };
    return C(m, 1) + 4 * C(m, 2) + 6 * C(m, 3) + 3 * C(m, 4);
}

SparseVec apply_projector(const Irrep& ir, int i, int j, const SparseVec& v, const LabelSpace& ls) {
    const Group& G = the_group();
    std::map<int, double> acc;
    const double pre = double(ir.d) / G.order();
    for (int g = 0; g < G.order(); ++g) {
        int w = ir.entry(g, i, j);
        if (w == 0) continue;
        for (auto& [idx, c] : v.c) {
            auto [s, kp] = scalar_transform_labels(G[g], ls.label(idx));
            acc[ls.index(kp)] += pre * w * s * c;
        }
    }
    SparseVec out;
    for (auto& [idx, c] : acc)
        if (c != 0.0) out.c.emplace_back(idx, c);
    return out;
}

int class_multiplicity(const KClass& cls, const Irrep& ir) {
    const Group& G = the_group();
    int s = 0;
    for (int g = 0; g < G.order(); ++g) {
        int chi = 0;
        for (auto& k : cls.members) {
            auto [sg, kp] = scalar_transform_labels(G[g], k);
            if (kp == k) chi += sg;
        }
        s += chi * ir.chi[g];
    }
    if (s % G.order() != 0) throw std::logic_error("class_multiplicity: non-integer multiplicity");
    return s / G.order();
}

ProjectedBasis project_basis(int m, double drop_tol) {
    const Group& G = the_group();
    const auto& irr = the_irreps();
    LabelSpace ls{m};
    ProjectedBasis pb;
    pb.m = m;
    pb.classes = decompose_classes(m);
    pb.blocks.resize(irr.size());
    for (int q = 0; q < irr.size(); ++q) pb.blocks[q].resize(irr[q].d);
    pb.class_mult.assign(pb.classes.size(), std::vector<int>(irr.size(), 0));
    std::vector<int> local(ls.size(), -1);
    for (std::size_t ci = 0; ci < pb.classes.size(); ++ci) {
        const KClass& cls = pb.classes[ci];
        const int s = cls.size();
        for (int a = 0; a < s; ++a) local[ls.index(cls.members[a])] = a;
        // act[g][a] = (sign, b) with P(g) e_a = sign e_b inside the class
        std::vector<std::vector<std::pair<int, int>>> act(G.order(), std::vector<std::pair<int, int>>(s));
        for (int g = 0; g < G.order(); ++g)
            for (int a = 0; a < s; ++a) {
                auto [sg, kp] = scalar_transform_labels(G[g], cls.members[a]);
                act[g][a] = {sg, local[ls.index(kp)]};
            }
        auto projector = [&](const Irrep& ir, int i, int j, const std::vector<double>& v) {
            std::vector<double> w(s, 0.0);
            const double f = double(ir.d) / G.order();
            for (int g = 0; g < G.order(); ++g) {
                const int c = ir.entry(g, i, j);
                if (c == 0) continue;
                for (int a = 0; a < s; ++a)
                    if (v[a] != 0.0) w[act[g][a].second] += f * c * act[g][a].first * v[a];
            }
            return w;
        };
        auto to_sparse = [&](const std::vector<double>& w) {
            SparseVec u;
            for (int a = 0; a < s; ++a)
                if (std::fabs(w[a]) > 1e-14) u.c.emplace_back(ls.index(cls.members[a]), w[a]);
            std::sort(u.c.begin(), u.c.end());
            return u;
        };
        for (int q = 0; q < irr.size(); ++q) {
            const int want = class_multiplicity(cls, irr[q]);
            pb.class_mult[ci][q] = want;
            if (want == 0) continue;
            std::vector<std::vector<double>> kept;
            for (int a = 0; a < s && static_cast<int>(kept.size()) < want; ++a) {
                std::vector<double> e(s, 0.0);
                e[a] = 1.0;
                std::vector<double> w = projector(irr[q], 0, 0, e);
                for (int pass = 0; pass < 2; ++pass)
                    for (auto& u : kept) {
                        double d = 0.0;
                        for (int b = 0; b < s; ++b) d += u[b] * w[b];
                        for (int b = 0; b < s; ++b) w[b] -= d * u[b];
                    }
                double nr = 0.0;
                for (double x : w) nr += x * x;
                nr = std::sqrt(nr);
                if (nr <= drop_tol) continue;
                for (double& x : w) x /= nr;
                kept.push_back(w);
            }
            if (static_cast<int>(kept.size()) != want) {
                std::ostringstream os;
                os << "project_basis: class " << ci << " yields " << kept.size() << " vectors for " << irr[q].label
                   << ", characters predict " << want;
                throw std::runtime_error(os.str());
            }
            for (auto& u : kept) {
                pb.blocks[q][0].push_back({q, 0, static_cast<int>(ci), to_sparse(u)});
                // partners in the other rows through the transfer operators P_j1
                for (int j = 1; j < irr[q].d; ++j) {
                    std::vector<double> w = projector(irr[q], j, 0, u);
                    double nr = 0.0;
                    for (double x : w) nr += x * x;
                    nr = std::sqrt(nr);
                    if (std::fabs(nr - 1.0) > 1e-10)
                        throw std::logic_error("project_basis: transfer operator is not isometric");
                    for (double& x : w) x /= nr;
                    pb.blocks[q][j].push_back({q, j, static_cast<int>(ci), to_sparse(w)});
                }
            }
        }
        for (int a = 0; a < s; ++a) local[ls.index(cls.members[a])] = -1;
    }
    return pb;
}

void write_character_csv(std::ostream& os) {
    const Group& G = the_group();
    const auto& irr = the_irreps();
    os << "irrep,dim";
    for (int g = 0; g < G.order(); ++g) os << ",g" << g;
    os << "\n";
    for (auto& ir : irr.all()) {
        os << ir.label << "," << ir.d;
        for (int c : ir.chi) os << "," << c;
        os << "\n";
    }
}

void write_multiplicity_csv(const ProjectedBasis& pb, std::ostream& os) {
    const auto& irr = the_irreps();
    os << "irrep,dim,count\n";
    for (int q = 0; q < irr.size(); ++q) os << irr[q].label << "," << irr[q].d << "," << pb.count(q) << "\n";
}

}  // namespace n4d
