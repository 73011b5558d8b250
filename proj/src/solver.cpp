#include "n4d/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <json.hpp>

#include "n4d/util.hpp"

namespace n4d {

std::string to_string(PencilMode m) { return m == PencilMode::nonsymmetric ? "nonsymmetric" : "symmetrized"; }

PencilMode pencil_mode_from_string(const std::string& s) {
    if (s == "nonsymmetric") return PencilMode::nonsymmetric;
    if (s == "symmetrized") return PencilMode::symmetrized;
    throw std::invalid_argument("unknown pencil mode '" + s + "' (nonsymmetric|symmetrized)");
}

CoincidenceRule CoincidenceRule::parse(const std::string& s) {
    if (s == "hard_core") return hard_core();
    if (s == "half_cell") return half_cell();
    char* end = nullptr;
    double f = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !(f > 0))
        throw std::invalid_argument("coincidence rule '" + s + "' is not hard_core, half_cell or a positive factor");
    return {"factor", f};
}

std::string CoincidenceRule::describe() const {
    std::ostringstream os;
    os << name << ": V = c/(" << format_sig(factor, 15) << "*h) where r1 = r2";
    return os.str();
}

double ProblemConfig::omega() const { return std::sqrt(2.0 * omega2_half); }

OscillatorSpec ProblemConfig::oscillator() const { return OscillatorSpec::from_omega2_half(omega2_half, grid.b, m); }

void ProblemConfig::validate() const {
    if (grid.n < 2) throw std::invalid_argument("config: n must be >= 2");
    if (!(grid.b > 0)) throw std::invalid_argument("config: b must be positive");
    if (m < 1) throw std::invalid_argument("config: m must be >= 1");
    if (m > grid.n) throw std::invalid_argument("config: m must not exceed n");
    if (!(omega2_half > 0)) throw std::invalid_argument("config: omega2_half must be positive");
    if (coulomb_c < 0) throw std::invalid_argument("config: coulomb_c must be >= 0");
    if (!(coincidence.factor > 0)) throw std::invalid_argument("config: coincidence factor must be positive");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

GridFunction build_potential_grid(const ProblemConfig& cfg, bool include_harmonic, bool include_pair) {
    const GridSpec& g = cfg.grid;
    const int n = g.n;
    const double w2 = 2.0 * cfg.omega2_half;
    const double h = g.h();
    std::vector<double> x(n + 1), u(n + 1);
    for (int p = 1; p <= n; ++p) {
        x[p] = g.x(p);
        u[p] = include_harmonic ? w2 * x[p] * x[p] / 4.0 : 0.0;
    }
    const bool pair = include_pair && cfg.coulomb_c != 0.0;
    const double vc = cfg.coulomb_c / (cfg.coincidence.factor * h);
    GridFunction out(g.size());
    std::size_t mu = 0;
    for (int l = 1; l <= n; ++l)
        for (int k = 1; k <= n; ++k)
            for (int i = 1; i <= n; ++i)
                for (int p = 1; p <= n; ++p, ++mu) {
                    double v = u[p] + u[i] + u[k] + u[l];
                    if (pair) {
                        if (p == k && i == l) {
                            v += vc;
                        } else {
                            double dx = x[p] - x[k], dy = x[i] - x[l];
                            v += cfg.coulomb_c / std::sqrt(dx * dx + dy * dy);
                        }
                    }
                    out[mu] = v;
                }
    return out;
}

AxisGrams axis_grams(const OscillatorBasis& basis, double omega, int max_power) {
    const int n = basis.grid.n;
    Eigen::MatrixXd A = build_A(n);
    Eigen::VectorXd u(n);
    for (int p = 1; p <= n; ++p) {
        double x = basis.grid.x(p);
        u(p - 1) = omega * omega * x * x / 4.0;
    }
    AxisGrams g;
    Eigen::MatrixXd left = basis.phi;  // A^s phi
    for (int s = 0; s <= max_power; ++s) {
        g.G.push_back(left.transpose() * basis.phi);
        g.D.push_back(left.transpose() * u.asDiagonal() * basis.phi);
        left = A * left;
    }
    return g;
}

namespace {

struct SepTerm {
    double z;
    std::array<const Eigen::MatrixXd*, 4> X;
    std::array<int, 4> id;  // stable ordering key per axis: 2 * power + (1 for D)
};

// out += sum z * X[3] (x) X[2] (x) X[1] (x) X[0] in label ordering (axis 0 fastest)
void accumulate_kron(Eigen::MatrixXd& out, const std::vector<SepTerm>& terms, int m) {
    struct Group {
        std::array<const Eigen::MatrixXd*, 3> X;
        Eigen::MatrixXd X0;
    };
    std::map<std::array<int, 3>, Group> groups;
    for (auto& t : terms) {
        std::array<int, 3> key{t.id[1], t.id[2], t.id[3]};
        auto it = groups.find(key);
        if (it == groups.end())
            it = groups.emplace(key, Group{{t.X[1], t.X[2], t.X[3]}, Eigen::MatrixXd::Zero(m, m)}).first;
        it->second.X0 += t.z * (*t.X[0]);
    }
    const std::size_t D = static_cast<std::size_t>(m) * m * m * m;
    double* o = out.data();
    for (auto& [key, grp] : groups) {
        const Eigen::MatrixXd& X0 = grp.X0;
        const Eigen::MatrixXd &X1 = *grp.X[0], &X2 = *grp.X[1], &X3 = *grp.X[2];
        for (int c3 = 0; c3 < m; ++c3)
            for (int r3 = 0; r3 < m; ++r3) {
                const double a3 = X3(r3, c3);
                if (a3 == 0.0) continue;
                for (int c2 = 0; c2 < m; ++c2)
                    for (int r2 = 0; r2 < m; ++r2) {
                        const double a2 = a3 * X2(r2, c2);
                        if (a2 == 0.0) continue;
                        for (int c1 = 0; c1 < m; ++c1)
                            for (int r1 = 0; r1 < m; ++r1) {
                                const double a1 = a2 * X1(r1, c1);
                                if (a1 == 0.0) continue;
                                const std::size_t rb = static_cast<std::size_t>(m) * (r1 + m * (r2 + m * r3));
                                for (int c0 = 0; c0 < m; ++c0) {
                                    const std::size_t col = c0 + static_cast<std::size_t>(m) * (c1 + m * (c2 + m * c3));
                                    double* dst = o + col * D + rb;
                                    const double* src = X0.data() + static_cast<std::size_t>(c0) * m;
                                    for (int r0 = 0; r0 < m; ++r0) dst[r0] += a1 * src[r0];
                                }
                            }
                    }
            }
    }
}

// Contract a 4-axis tensor (axis 0 fastest, each of extent n) against the
// columns of `basis` (n x q) along every axis; result has extent q per axis.
void contract_all(const double* data, int n, const Eigen::MatrixXd& basis, std::vector<double>& out,
                  std::vector<double>& work) {
    const int q = static_cast<int>(basis.cols());
    std::size_t rest = static_cast<std::size_t>(n) * n * n;
    const double* src = data;
    for (int step = 0; step < 4; ++step) {
        // steps alternate buffers so that the last one lands in `out`
        std::vector<double>& target = step % 2 == 0 ? work : out;
        target.resize(rest * q);
        Eigen::Map<const Eigen::MatrixXd> X(src, n, static_cast<Eigen::Index>(rest));
        Eigen::Map<Eigen::MatrixXd> Y(target.data(), static_cast<Eigen::Index>(rest), q);
        Y.noalias() = X.transpose() * basis;
        src = target.data();
        // the new axis sits last; the next step contracts the next original axis
        rest = rest / n * q;
    }
}

struct StreamContext {
    const ProblemConfig* cfg;
    const OscillatorBasis* basis;
    const GridFunction* w;
    DirectPolyMatrix N;
    Eigen::MatrixXd ext;  // n x (P+1) m, columns A^s phi_k, s major
    int P = 0;
    std::vector<std::pair<double, std::array<int, 4>>> terms;
};

void stream_column(const StreamContext& ctx, const StreamOptions& opt, int col, double* dst, GridFunction& vbuf,
                   std::vector<double>& t1, std::vector<double>& t2) {
    const OscillatorBasis& bs = *ctx.basis;
    const int n = bs.grid.n, m = bs.m();
    LabelSpace ls{m};
    Label k = ls.label(col);
    vbuf.resize(bs.grid.size());
    std::size_t mu = 0;
    const GridFunction& w = *ctx.w;
    for (int l = 0; l < n; ++l) {
        const double a3 = bs.phi(l, k[3]);
        for (int kk = 0; kk < n; ++kk) {
            const double a2 = a3 * bs.phi(kk, k[2]);
            for (int i = 0; i < n; ++i) {
                const double a1 = a2 * bs.phi(i, k[1]);
                for (int p = 0; p < n; ++p, ++mu) vbuf[mu] = a1 * bs.phi(p, k[0]) * w[mu];
            }
        }
    }
    const int D = ls.size();
    if (opt.kernel == StreamKernel::lazy_matvec) {
        GridFunction y = ctx.N.matvec(vbuf);
        contract_all(y.data(), n, bs.phi, t1, t2);
        for (int r = 0; r < D; ++r) dst[r] = t1[r];
        return;
    }
    contract_all(vbuf.data(), n, ctx.ext, t1, t2);
    const int q = static_cast<int>(ctx.ext.cols());
    for (int r = 0; r < D; ++r) {
        Label kr = ls.label(r);
        double s = 0.0;
        for (auto& [z, e] : ctx.terms) {
            std::size_t idx = (e[0] * m + kr[0]) +
                              static_cast<std::size_t>(q) * ((e[1] * m + kr[1]) +
                                                             static_cast<std::size_t>(q) * ((e[2] * m + kr[2]) +
                                                                                            static_cast<std::size_t>(q) * (e[3] * m + kr[3])));
            s += z * t1[idx];
        }
        dst[r] = s;
    }
}

}  // namespace

Eigen::MatrixXd stream_weighted_operator(const ProblemConfig& cfg, const OscillatorBasis& basis, const GridFunction& w,
                                         const StreamOptions& opt) {
    const int n = basis.grid.n, m = basis.m();
    if (w.size() != basis.grid.size()) throw std::invalid_argument("stream_weighted_operator: weight size mismatch");
    const double per_worker = (3.0 * basis.grid.size() + 2.0 * std::pow(3.0 * m, 4)) * sizeof(double);
    if (per_worker * opt.threads > cfg.memory_budget)
        throw std::runtime_error("stream_weighted_operator: streaming buffers exceed the memory budget");
    StreamContext ctx;
    ctx.cfg = &cfg;
    ctx.basis = &basis;
    ctx.w = &w;
    ctx.N = build_N(n, cfg.gamma_p);
    ctx.P = ctx.N.max_power();
    ctx.ext.resize(n, (ctx.P + 1) * m);
    {
        Eigen::MatrixXd A = build_A(n), left = basis.phi;
        for (int s = 0; s <= ctx.P; ++s) {
            ctx.ext.middleCols(s * m, m) = left;
            left = A * left;
        }
    }
    for (auto& t : ctx.N.terms()) ctx.terms.emplace_back(t.value(), t.pow);

    LabelSpace ls{m};
    const int D = ls.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(D, D);
    const Group& G = the_group();
    std::vector<int> cols;
    std::vector<KClass> classes;
    if (opt.use_symmetry) {
        classes = decompose_classes(m);
        for (auto& c : classes) cols.push_back(ls.index(c.rep));
    } else {
        cols.resize(D);
        std::iota(cols.begin(), cols.end(), 0);
    }
    parallel_for(static_cast<int>(cols.size()), opt.threads, [&](int begin, int end) {
        GridFunction vbuf;
        std::vector<double> t1, t2;
        for (int c = begin; c < end; ++c) stream_column(ctx, opt, cols[c], out.col(cols[c]).data(), vbuf, t1, t2);
    });
    if (opt.use_symmetry) {
        // column of k' = sigma(R) k0 from the representative column:
        // O[k, k'] = f(R, k0) f(R^-1, k) O[sigma(R^-1) k, k0]
        std::vector<std::vector<std::pair<int, int>>> act(G.order(), std::vector<std::pair<int, int>>(D));
        for (int g = 0; g < G.order(); ++g)
            for (int r = 0; r < D; ++r) {
                auto [s, kp] = scalar_transform_labels(G[g], ls.label(r));
                act[g][r] = {s, ls.index(kp)};
            }
        for (auto& cls : classes) {
            const int c0 = ls.index(cls.rep);
            for (auto& kp : cls.members) {
                const int c = ls.index(kp);
                if (c == c0) continue;
                int g = 0;
                while (act[g][c0].second != c) ++g;
                const double f0 = act[g][c0].first;
                const int gi = G.inverse(g);
                for (int r = 0; r < D; ++r) out(r, c) = f0 * act[gi][r].first * out(act[gi][r].second, c0);
            }
        }
    }
    return out;
}

SubspaceOperators assemble_subspace_operators(const ProblemConfig& cfg, const OscillatorBasis& basis,
                                              const StreamOptions& opt) {
    cfg.validate();
    const int m = basis.m();
    const int D = m * m * m * m;
    const double label_bytes = 3.0 * D * double(D) * sizeof(double);
    if (label_bytes > cfg.memory_budget)
        throw std::runtime_error("assemble_subspace_operators: label-space operators exceed the memory budget");
    DirectPolyMatrix M = build_M(cfg.grid.n), N = build_N(cfg.grid.n, cfg.gamma_p);
    const int P = std::max(M.max_power(), N.max_power());
    AxisGrams g = axis_grams(basis, cfg.omega(), P);
    SubspaceOperators ops;
    ops.m = m;
    ops.h = cfg.grid.h();
    const double ih2 = 1.0 / (ops.h * ops.h);

    std::vector<SepTerm> th, tb;
    auto gram_term = [&](double z, const std::array<int, 4>& pow) {
        SepTerm t{z, {}, {}};
        for (int a = 0; a < 4; ++a) {
            t.X[a] = &g.G[pow[a]];
            t.id[a] = 2 * pow[a];
        }
        return t;
    };
    for (auto& t : M.terms()) th.push_back(gram_term(ih2 * t.value(), t.pow));
    for (auto& t : N.terms()) {
        SepTerm base = gram_term(t.value(), t.pow);
        tb.push_back(base);
        for (int a = 0; a < 4; ++a) {
            SepTerm y = base;
            y.X[a] = &g.D[t.pow[a]];
            y.id[a] += 1;
            th.push_back(y);
        }
    }
    ops.H0 = Eigen::MatrixXd::Zero(D, D);
    ops.B = Eigen::MatrixXd::Zero(D, D);
    accumulate_kron(ops.H0, th, m);
    accumulate_kron(ops.B, tb, m);
    if (cfg.coulomb_c != 0.0) {
        GridFunction v = build_potential_grid(cfg, false, true);
        StreamOptions so = opt;
        so.threads = std::max(so.threads, cfg.threads);
        ops.C = stream_weighted_operator(cfg, basis, v, so);
    }
    return ops;
}

GridFunction expand_labels(const OscillatorBasis& basis, const Eigen::VectorXd& a) {
    const int n = basis.grid.n, m = basis.m();
    if (a.size() != m * m * m * m) throw std::invalid_argument("expand_labels: size mismatch");
    // same rotation trick as the contraction, with phi^T swapped for phi
    Eigen::MatrixXd phiT = basis.phi.transpose();  // m x n
    std::vector<double> cur(a.data(), a.data() + a.size()), next;
    std::size_t rest = static_cast<std::size_t>(m) * m * m;
    for (int step = 0; step < 4; ++step) {
        next.resize(rest * n);
        Eigen::Map<const Eigen::MatrixXd> X(cur.data(), m, static_cast<Eigen::Index>(rest));
        Eigen::Map<Eigen::MatrixXd> Y(next.data(), static_cast<Eigen::Index>(rest), n);
        Y.noalias() = X.transpose() * phiT;
        cur.swap(next);
        rest = rest / m * n;
    }
    return GridFunction(cur.begin(), cur.end());
}

Eigen::VectorXd contract_labels(const OscillatorBasis& basis, const GridFunction& f) {
    std::vector<double> t1, t2;
    contract_all(f.data(), basis.grid.n, basis.phi, t1, t2);
    return Eigen::Map<Eigen::VectorXd>(t1.data(), static_cast<Eigen::Index>(t1.size()));
}

Eigen::MatrixXd coefficient_matrix(const std::vector<SymmetryAdaptedVector>& vecs, int label_dim) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(label_dim, static_cast<Eigen::Index>(vecs.size()));
    for (std::size_t j = 0; j < vecs.size(); ++j)
        for (auto& [i, c] : vecs[j].v.c) C(i, static_cast<Eigen::Index>(j)) = c;
    return C;
}

namespace {

Eigen::SparseMatrix<double> sparse_coefficients(const std::vector<SymmetryAdaptedVector>& vecs, int label_dim) {
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t j = 0; j < vecs.size(); ++j)
        for (auto& [i, c] : vecs[j].v.c) t.emplace_back(i, static_cast<int>(j), c);
    Eigen::SparseMatrix<double> C(label_dim, static_cast<int>(vecs.size()));
    C.setFromTriplets(t.begin(), t.end());
    return C;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& op, const Eigen::SparseMatrix<double>& C) {
    Eigen::MatrixXd OC = op * C;
    return Eigen::MatrixXd(C.transpose() * OC);
}

}  // namespace

BlockPencil assemble_block_pencil(int irrep, int row, const SubspaceOperators& ops, const ProjectedBasis& pb) {
    const auto& vecs = pb.blocks.at(irrep).at(row);
    const int D = ops.m * ops.m * ops.m * ops.m;
    auto C = sparse_coefficients(vecs, D);
    BlockPencil bp;
    bp.irrep = irrep;
    bp.row = row;
    bp.H = project(ops.H0, C);
    if (ops.has_pair()) bp.H += project(ops.C, C);
    bp.B = project(ops.B, C);
    bp.asymmetry = bp.H.size() ? (bp.H - bp.H.transpose()).cwiseAbs().maxCoeff() : 0.0;
    return bp;
}

BlockSolution solve_block(const BlockPencil& pencil, PencilMode mode) {
    BlockSolution s;
    s.irrep = pencil.irrep;
    s.row = pencil.row;
    s.asymmetry = pencil.asymmetry;
    const Eigen::Index r = pencil.B.rows();
    if (r == 0) return s;
    Eigen::MatrixXd Bs = 0.5 * (pencil.B + pencil.B.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> be(Bs, Eigen::EigenvaluesOnly);
    s.min_b_eig = be.eigenvalues()(0);
    Eigen::LLT<Eigen::MatrixXd> llt(Bs);
    if (llt.info() != Eigen::Success || s.min_b_eig <= 0.0) {
        std::ostringstream os;
        os << "solve_block: B of " << the_irreps()[pencil.irrep].label << " row " << pencil.row + 1
           << " is not positive definite (smallest Ritz value " << s.min_b_eig << ", condition estimate "
           << be.eigenvalues()(r - 1) / std::fabs(s.min_b_eig) << ")";
        throw std::runtime_error(os.str());
    }
    const Eigen::MatrixXd L = llt.matrixL();
    // K = L^-1 H L^-T
    Eigen::MatrixXd Hm = mode == PencilMode::symmetrized ? Eigen::MatrixXd(0.5 * (pencil.H + pencil.H.transpose()))
                                                         : pencil.H;
    Eigen::MatrixXd K = L.triangularView<Eigen::Lower>().solve(Hm);
    K = L.triangularView<Eigen::Lower>().solve(K.transpose()).transpose();
    Eigen::MatrixXd Y;
    Eigen::VectorXd ev;
    if (mode == PencilMode::symmetrized) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()));
        ev = es.eigenvalues();
        Y = es.eigenvectors();
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(K);
        if (es.info() != Eigen::Success) throw std::runtime_error("solve_block: eigensolver did not converge");
        const auto& cv = es.eigenvalues();
        const auto& cw = es.eigenvectors();
        std::vector<Eigen::Index> ord(r);
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(), [&](auto a, auto b) { return cv(a).real() < cv(b).real(); });
        ev.resize(r);
        Y.resize(r, r);
        for (Eigen::Index j = 0; j < r; ++j) {
            ev(j) = cv(ord[j]).real();
            s.max_imag = std::max(s.max_imag, std::fabs(cv(ord[j]).imag()));
            Y.col(j) = cw.col(ord[j]).real();
            if (Y.col(j).norm() == 0.0) Y.col(j) = cw.col(ord[j]).imag();
        }
    }
    // x = L^-T y, scaled to x^T B x = 1 with a deterministic sign
    s.vectors = L.transpose().triangularView<Eigen::Upper>().solve(Y);
    for (Eigen::Index j = 0; j < r; ++j) {
        auto x = s.vectors.col(j);
        double nb = std::sqrt(x.dot(Bs * x));
        Eigen::Index im;
        x.cwiseAbs().maxCoeff(&im);
        x *= (x(im) < 0 ? -1.0 : 1.0) / nb;
    }
    s.energies.assign(ev.data(), ev.data() + r);
    return s;
}

std::vector<double> dense_subspace_spectrum(const SubspaceOperators& ops, PencilMode mode) {
    BlockPencil bp;
    bp.H = ops.H();
    bp.B = ops.B;
    return solve_block(bp, mode).energies;
}

const BlockSolution* Solution::find(int irrep, int row) const {
    for (auto& b : blocks)
        if (b.irrep == irrep && b.row == row) return &b;
    return nullptr;
}

namespace {

std::vector<int> selected_irreps(const SolveOptions& opt) {
    const auto& irr = the_irreps();
    std::vector<int> sel;
    if (opt.irreps.empty()) {
        for (int q = 0; q < irr.size(); ++q) sel.push_back(q);
        return sel;
    }
    for (int q = 0; q < irr.size(); ++q)
        if (std::find(opt.irreps.begin(), opt.irreps.end(), irr[q].label) != opt.irreps.end()) sel.push_back(q);
    for (auto& l : opt.irreps)
        if (irr.index_of(l) < 0) throw std::invalid_argument("unknown irrep label " + l);
    return sel;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Solution solve_with_operators(const ProblemConfig& cfg, OscillatorBasis basis, std::shared_ptr<const ProjectedBasis> pb,
                              std::shared_ptr<const SubspaceOperators> ops, const SolveOptions& opt) {
    Solution s;
    s.cfg = cfg;
    s.basis = std::move(basis);
    s.pb = std::move(pb);
    s.ops = std::move(ops);
    auto t0 = std::chrono::steady_clock::now();
    const auto& irr = the_irreps();
    std::vector<std::pair<int, int>> jobs;
    for (int q : selected_irreps(opt))
        for (int j = 0; j < (opt.both_rows ? irr[q].d : 1); ++j) jobs.emplace_back(q, j);
    s.blocks.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int b, int e) {
        for (int t = b; t < e; ++t) {
            auto bp = assemble_block_pencil(jobs[t].first, jobs[t].second, *s.ops, *s.pb);
            s.blocks[t] = solve_block(bp, cfg.pencil);
        }
    });
    s.seconds_solve = seconds_since(t0);
    return s;
}

Solution solve_problem(const ProblemConfig& cfg, const SolveOptions& opt) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    OscillatorBasis basis = make_basis(cfg.oscillator(), cfg.grid);
    double tb = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto pb = std::make_shared<const ProjectedBasis>(project_basis(cfg.m));
    double tp = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    StreamOptions so = opt.stream;
    so.threads = std::max(so.threads, cfg.threads);
    auto ops = std::make_shared<const SubspaceOperators>(assemble_subspace_operators(cfg, basis, so));
    double ta = seconds_since(t0);
    Solution s = solve_with_operators(cfg, std::move(basis), pb, ops, opt);
    s.seconds_basis = tb;
    s.seconds_projection = tp;
    s.seconds_assembly = ta;
    return s;
}

Eigen::VectorXd block_state_labels(const Solution& s, const BlockSolution& b, int r) {
    const int m = s.basis.m();
    const int D = m * m * m * m;
    Eigen::MatrixXd C = coefficient_matrix(s.pb->blocks.at(b.irrep).at(b.row), D);
    Eigen::VectorXd a = C * b.vectors.col(r);
    // lattice norm through the Gram matrix of the sampled one-dimensional states
    Eigen::MatrixXd G0 = s.basis.phi.transpose() * s.basis.phi;
    std::vector<double> cur(a.data(), a.data() + D), next(D);
    std::size_t rest = static_cast<std::size_t>(m) * m * m;
    for (int step = 0; step < 4; ++step) {
        Eigen::Map<const Eigen::MatrixXd> X(cur.data(), m, static_cast<Eigen::Index>(rest));
        Eigen::Map<Eigen::MatrixXd> Y(next.data(), static_cast<Eigen::Index>(rest), m);
        Y.noalias() = X.transpose() * G0;
        cur.swap(next);
    }
    double nrm2 = a.dot(Eigen::Map<Eigen::VectorXd>(cur.data(), D));
    return a / std::sqrt(nrm2);
}

GridFunction block_state(const Solution& s, const BlockSolution& b, int r) {
    return expand_labels(s.basis, block_state_labels(s, b, r));
}

std::vector<double> exact_block_energies(const ProjectedBasis& pb, const OscillatorBasis& basis, int irrep) {
    std::vector<double> e;
    for (auto& v : pb.blocks.at(irrep).at(0)) e.push_back(noninteracting_energy(pb.classes[v.class_id].rep, basis));
    std::sort(e.begin(), e.end());
    return e;
}

std::vector<DegenerateLevel> degeneracy_report(const Solution& s, double tol, double e_max) {
    const auto& irr = the_irreps();
    struct P {
        double e;
        int q;
    };
    std::vector<P> all;
    for (auto& b : s.blocks) {
        if (b.row != 0) continue;
        for (double e : b.energies)
            if (e / s.omega() <= e_max) all.push_back({e / s.omega(), b.irrep});
    }
    std::sort(all.begin(), all.end(), [](const P& a, const P& b) { return a.e < b.e || (a.e == b.e && a.q < b.q); });
    std::vector<DegenerateLevel> out;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        DegenerateLevel lv;
        double sum = 0;
        std::vector<int> qs;
        while (j < all.size() && all[j].e - all[i].e <= tol) {
            qs.push_back(all[j].q);
            sum += all[j].e;
            lv.degeneracy += irr[all[j].q].d;
            ++j;
        }
        std::sort(qs.begin(), qs.end());
        for (int q : qs) lv.irreps.push_back(irr[q].label);
        lv.e_over_omega = sum / double(j - i);
        out.push_back(lv);
        i = j;
    }
    return out;
}

FitResult fit_power_law(const std::vector<double>& n, const std::vector<double>& err) {
    FitResult f;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (i > 0 && !(err[i] < err[i - 1])) f.monotone = false;
        if (!(err[i] > 0)) {
            f.all_positive = false;
            continue;
        }
        x.push_back(std::log(n[i]));
        y.push_back(std::log(err[i]));
    }
    const std::size_t N = x.size();
    if (N < 2) return f;
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / N, my = std::accumulate(y.begin(), y.end(), 0.0) / N;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < N; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double slope = sxy / sxx;
    f.slope = -slope;
    f.intercept = my - slope * mx;
    if (N > 2) {
        double ss = 0;
        for (std::size_t i = 0; i < N; ++i) {
            double r = y[i] - (f.intercept + slope * x[i]);
            ss += r * r;
        }
        f.stderr_ = std::sqrt(ss / double(N - 2) / sxx);
    }
    return f;
}

ConvergenceStudy run_convergence_study(const ProblemConfig& base, const std::vector<int>& levels,
                                       const std::vector<int>& ns) {
    if (base.coulomb_c != 0.0) throw std::invalid_argument("convergence study requires c = 0");
    ConvergenceStudy st;
    st.ns = ns;
    st.levels = levels;
    st.energies.assign(levels.size(), {});
    auto pb = std::make_shared<const ProjectedBasis>(project_basis(base.m));
    const int g11 = the_irreps().index_of("G11");
    SolveOptions so;
    so.irreps = {"G11"};
    for (int n : ns) {
        ProblemConfig cfg = base;
        cfg.grid = GridSpec(n, base.grid.b);
        cfg.validate();
        OscillatorBasis basis = make_basis(cfg.oscillator(), cfg.grid);
        if (st.exact.empty()) {
            auto ex = exact_block_energies(*pb, basis, g11);
            for (int lv : levels) st.exact.push_back(ex.at(lv - 1));
        }
        auto ops = std::make_shared<const SubspaceOperators>(assemble_subspace_operators(cfg, basis));
        Solution s = solve_with_operators(cfg, basis, pb, ops, so);
        const BlockSolution* b = s.find(g11, 0);
        for (std::size_t i = 0; i < levels.size(); ++i)
            st.energies[i].push_back(b->energies.at(levels[i] - 1) / cfg.omega());
    }
    std::vector<double> nd(ns.begin(), ns.end());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        std::vector<double> err;
        for (double e : st.energies[i]) err.push_back(st.exact[i] - e);
        st.fits.push_back(fit_power_law(nd, err));
    }
    return st;
}

FitResult laplacian_ground_convergence(const std::vector<int>& ns) {
    std::vector<double> nd, err;
    const double exact = 4.0 * M_PI * M_PI;
    for (int n : ns) {
        nd.push_back(n);
        err.push_back(exact - SpectralOracle(n).ground_state());
    }
    return fit_power_law(nd, err);
}

void write_levels_csv(const Solution& s, std::ostream& os) {
    const auto& irr = the_irreps();
    os << "irrep,row,r,E_over_omega,degeneracy\n";
    char buf[160];
    for (auto& b : s.blocks) {
        for (std::size_t r = 0; r < b.energies.size(); ++r) {
            std::snprintf(buf, sizeof buf, "%s,%d,%zu,%s,%d\n", irr[b.irrep].label.c_str(), b.row + 1, r + 1,
                          format_fixed(b.energies[r] / s.omega(), 6).c_str(), irr[b.irrep].d);
            os << buf;
        }
    }
}

std::string manifest_json(const Solution& s, double wall_seconds) {
    using nlohmann::ordered_json;
    const auto& irr = the_irreps();
    const ProblemConfig& c = s.cfg;
    ordered_json j;
    j["n"] = c.grid.n;
    j["b"] = sig15(c.grid.b);
    j["h"] = sig15(c.grid.h());
    j["m"] = c.m;
    j["omega2_half"] = sig15(c.omega2_half);
    j["omega"] = sig15(c.omega());
    j["coulomb_c"] = sig15(c.coulomb_c);
    j["gamma_prime"] = std::to_string(c.gamma_p.numerator()) + "/" + std::to_string(c.gamma_p.denominator());
    j["gamma_prime_value"] = sig15(to_double(c.gamma_p));
    j["coincidence_rule"] = c.coincidence.describe();
    j["coincidence_name"] = c.coincidence.name;
    j["coincidence_factor"] = sig15(c.coincidence.factor);
    j["pencil"] = to_string(c.pencil);
    j["threads"] = c.threads;
    j["memory_budget_bytes"] = sig15(c.memory_budget);
    ordered_json blocks = ordered_json::array();
    for (auto& b : s.blocks) {
        ordered_json e;
        e["irrep"] = irr[b.irrep].label;
        e["row"] = b.row + 1;
        e["size"] = b.energies.size();
        e["asymmetry"] = sig15(b.asymmetry);
        e["max_imag"] = sig15(b.max_imag);
        e["min_B_eigenvalue"] = sig15(b.min_b_eig);
        if (!b.energies.empty()) e["lowest_E_over_omega"] = sig15(b.energies[0] / s.omega());
        blocks.push_back(e);
    }
    j["blocks"] = blocks;
    if (wall_seconds >= 0) j["wall_clock_seconds"] = sig15(wall_seconds);
    return j.dump(2) + "\n";
}

}  // namespace n4d
