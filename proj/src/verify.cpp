#include "n4d/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "n4d/kron.hpp"
#include "n4d/oscillator.hpp"
#include "n4d/solver.hpp"
#include "n4d/util.hpp"

namespace n4d {

namespace {

std::string num(double x) { return format_sig(x, 6); }

std::vector<double> oracle_list(const SpectralOracle& o, SpectralOracle::Which w) {
    const int n = o.n();
    std::vector<double> v;
    for (int l = 1; l <= n; ++l)
        for (int k = 1; k <= n; ++k)
            for (int i = 1; i <= n; ++i)
                for (int p = 1; p <= n; ++p) v.push_back(o.spectrum(w, {p, i, k, l}));
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<double> dense_list(const DirectPolyMatrix& m) {
    Eigen::MatrixXd d = assemble_dense(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + d.rows()};
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return INFINITY;
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
    return e;
}

}  // namespace

double block_equivalence_error(const ProblemConfig& cfg) {
    Solution s = solve_problem(cfg, SolveOptions{{}, true, {}});
    std::vector<double> u;
    for (auto& b : s.blocks)
        if (b.row == 0)
            for (double e : b.energies)
                for (int j = 0; j < the_irreps()[b.irrep].d; ++j) u.push_back(e / s.omega());
    std::sort(u.begin(), u.end());
    std::vector<double> d = dense_subspace_spectrum(*s.ops, cfg.pencil);
    if (d.size() != u.size()) return INFINITY;
    // the hard-core wall puts some levels near 1e7 omega, so compare relative to max(1, |E|)
    double e = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        e = std::max(e, std::fabs(u[i] - d[i] / s.omega()) / std::max(1.0, std::fabs(u[i])));
    return e;
}

std::vector<CheckResult> run_verify_suite(const VerifyProfile& prof) {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool pass, std::string detail) { out.push_back({std::move(name), pass, std::move(detail)}); };

    {
        auto c = solve_coefficient_systems(1, 0, prof.gamma_p);
        auto r = coefficient_residuals(c);
        bool ok = std::all_of(r.begin(), r.end(), [](const Rational& x) { return x.numerator() == 0; });
        add("stencil coefficient systems", ok, "alpha=" + num(to_double(c.alpha)) + " beta=" + num(to_double(c.beta)));
    }
    {
        const int n = 5;
        GridSpec g(n, 1.0);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1, 1);
        GridFunction f(g.size());
        for (double& x : f) x = u(rng);
        auto c = solve_coefficient_systems(1, 0, prof.gamma_p);
        GridFunction a = apply_rhs_operator(f, c, g), b = build_N(n, prof.gamma_p).matvec(f);
        double e = 0;
        for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
        add("stencil sums equal direct polynomials (n=5)", e <= 1e-12, "max diff " + num(e));
    }
    {
        double worst = 0.0;
        for (int n : {2, 3, 4}) {
            SpectralOracle o(n, prof.gamma_p);
            using W = SpectralOracle::Which;
            for (int i = 1; i <= 4; ++i)
                worst = std::max(worst, max_diff(dense_list(build_Mi(i, n)), oracle_list(o, W(i - 1))));
            worst = std::max(worst, max_diff(dense_list(build_M(n)), oracle_list(o, W::M)));
            worst = std::max(worst, max_diff(dense_list(build_N(n, prof.gamma_p)), oracle_list(o, W::N)));
        }
        add("closed-form spectra (n=2,3,4)", worst <= 1e-11, "max diff " + num(worst));
    }
    {
        Eigen::MatrixXd M = assemble_dense(build_M(4)), N = assemble_dense(build_N(4, prof.gamma_p));
        double e = (M * N - N * M).cwiseAbs().maxCoeff();
        add("[M,N] = 0 (n=4)", e <= 1e-13, "max " + num(e));
    }
    {
        double lo = INFINITY;
        for (int n = 2; n <= 6; ++n) lo = std::min(lo, dense_list(build_N(n, prof.gamma_p)).front());
        double lo_cf = INFINITY;
        for (int n : {10, 100, 1000, 10000}) lo_cf = std::min(lo_cf, SpectralOracle(n, prof.gamma_p).lambda_min());
        add("N positive definite", lo > 0 && lo_cf > 0, "dense min " + num(lo) + ", closed-form min " + num(lo_cf));
    }
    {
        auto a = nnz_counted(5), b = nnz_formulas(5);
        bool ok = a.mi == b.mi && a.m == b.m && a.nmat == b.nmat && a.lhs == b.lhs;
        add("nnz counts match formulas (n=5)", ok,
            "M=" + std::to_string(a.m) + "/" + std::to_string(b.m) + " N=" + std::to_string(a.nmat) + "/" +
                std::to_string(b.nmat));
    }
    {
        const auto& G = the_group();
        const auto& irr = the_irreps();
        int d2 = 0;
        for (auto& ir : irr.all()) d2 += ir.d * ir.d;
        std::string e = irr.check_homomorphism() + irr.check_unitarity() + irr.check_character_orthogonality();
        add("group and irreps", G.order() == 32 && irr.size() == 14 && d2 == 32 && e.empty(),
            "order " + std::to_string(G.order()) + ", irreps " + std::to_string(irr.size()) + ", sum d^2 " +
                std::to_string(d2) + (e.empty() ? "" : ", " + e));
    }
    {
        const int m = prof.m_small;
        ProjectedBasis pb = project_basis(m);
        const auto& irr = the_irreps();
        int total = 0;
        for (int q = 0; q < irr.size(); ++q) total += irr[q].d * pb.count(q);
        add("projected basis completeness (m=" + std::to_string(m) + ")", total == m * m * m * m,
            std::to_string(total) + " of " + std::to_string(m * m * m * m));
    }
    {
        FitResult f = laplacian_ground_convergence({10, 20, 40});
        add("Laplacian ground convergence order", f.slope > 5.5 && f.slope < 6.5 && f.monotone && f.all_positive,
            "slope " + num(f.slope));
    }
    {
        static const double table[] = {0.000001, 1.000017, 2.000235, 3.001945, 4.010898, 5.043776, 6.132232, 7.315886,
                                       8.628132, 10.088573, 11.705530, 13.481490, 15.416694, 17.510727, 19.763071,
                                       22.173266};
        OscillatorBasis bs = find_levels(OscillatorSpec::from_omega2_half(500.0, 1.0, 16));
        double e = 0;
        for (int i = 0; i < 16; ++i) e = std::max(e, std::fabs(static_cast<double>(bs.nu[i]) - table[i]));
        add("confined oscillator levels", e <= 1e-6, "max diff " + num(e));
    }
    for (double c : {0.0, 1.0}) {
        ProblemConfig cfg;
        cfg.grid = GridSpec(4, 1.0);
        cfg.m = 2;
        cfg.coulomb_c = c;
        cfg.gamma_p = prof.gamma_p;
        double e = block_equivalence_error(cfg);
        add("block spectra equal dense pencil (n=4, m=2, c=" + num(c) + ")", e <= 1e-9, "max rel diff " + num(e));
    }
    {
        ProblemConfig cfg;
        cfg.grid = GridSpec(prof.n_small, 1.0);
        cfg.m = prof.m_small;
        cfg.gamma_p = prof.gamma_p;
        Solution s = solve_problem(cfg, SolveOptions{{"G11"}, false, {}});
        auto ex = exact_block_energies(*s.pb, s.basis, the_irreps().index_of("G11"));
        double e0 = s.blocks[0].energies[0] / s.omega();
        add("quick solve lies below exact (n=" + std::to_string(prof.n_small) + ")", e0 <= ex[0] && e0 > 0,
            "E0/omega " + num(e0) + " exact " + num(ex[0]));
    }
    return out;
}

bool print_checks(const std::vector<CheckResult>& checks, std::ostream& os) {
    bool all = true;
    for (auto& c : checks) {
        os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        all = all && c.pass;
    }
    return all;
}

}  // namespace n4d
