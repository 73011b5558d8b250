#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "n4d/cache.hpp"
#include "n4d/solver.hpp"
#include "n4d/verify.hpp"

using namespace n4d;

namespace {

ProblemConfig small(int n, int m, double c) {
    ProblemConfig cfg;
    cfg.grid = GridSpec(n, 1.0);
    cfg.m = m;
    cfg.coulomb_c = c;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    ProblemConfig c = small(10, 4, 0);
    CHECK_NOTHROW(c.validate());
    c.m = 11;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small(10, 4, -1);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(CoincidenceRule::parse("half_cell").factor == 0.5);
    CHECK(CoincidenceRule::parse("0.25").factor == 0.25);
    CHECK_THROWS(CoincidenceRule::parse("-1"));
    CHECK_THROWS(pencil_mode_from_string("other"));
}

TEST_CASE("potential grid") {
    ProblemConfig c = small(6, 2, 1.0);
    c.coincidence = CoincidenceRule::half_cell();
    GridFunction v = build_potential_grid(c, false, true);
    const GridSpec& g = c.grid;
    CHECK(v[g.flat(2, 3, 2, 3)] == doctest::Approx(1.0 / (0.5 * g.h())));
    double dx = g.x(1) - g.x(4), dy = g.x(2) - g.x(6);
    CHECK(v[g.flat(1, 2, 4, 6)] == doctest::Approx(1.0 / std::sqrt(dx * dx + dy * dy)));
    GridFunction u = build_potential_grid(c, true, false);
    CHECK(u[g.flat(1, 1, 1, 1)] == doctest::Approx(4 * 250.0 * g.x(1) * g.x(1)));
}

TEST_CASE("block spectra equal the unreduced pencil") {
    CHECK(block_equivalence_error(small(4, 2, 0.0)) <= 1e-9);
    CHECK(block_equivalence_error(small(4, 2, 1.0)) <= 1e-9);
    ProblemConfig hc = small(5, 3, 1.0);
    hc.coincidence = CoincidenceRule::half_cell();
    CHECK(block_equivalence_error(hc) <= 1e-9);
}

TEST_CASE("streaming kernels and symmetry fill agree") {
    ProblemConfig c = small(6, 3, 1.0);
    OscillatorBasis bs = make_basis(c.oscillator(), c.grid);
    GridFunction w = build_potential_grid(c, false, true);
    StreamOptions a, b, d;
    b.kernel = StreamKernel::lazy_matvec;
    d.use_symmetry = false;
    d.threads = 2;
    Eigen::MatrixXd A = stream_weighted_operator(c, bs, w, a);
    Eigen::MatrixXd B = stream_weighted_operator(c, bs, w, b);
    Eigen::MatrixXd D = stream_weighted_operator(c, bs, w, d);
    const double s = A.cwiseAbs().maxCoeff();
    CHECK((A - B).cwiseAbs().maxCoeff() / s < 1e-13);
    CHECK((A - D).cwiseAbs().maxCoeff() / s < 1e-13);
}

TEST_CASE("separable assembly matches streaming the harmonic part") {
    ProblemConfig c = small(6, 3, 0.0);
    OscillatorBasis bs = make_basis(c.oscillator(), c.grid);
    SubspaceOperators ops = assemble_subspace_operators(c, bs);
    GridFunction u = build_potential_grid(c, true, false);
    Eigen::MatrixXd U = stream_weighted_operator(c, bs, u, {});
    GridFunction one(c.grid.size(), 1.0);
    Eigen::MatrixXd B = stream_weighted_operator(c, bs, one, {});
    CHECK((B - ops.B).cwiseAbs().maxCoeff() < 1e-13);
    // H0 - U is the kinetic part, whose label matrix is expand -> M -> contract
    DirectPolyMatrix M = build_M(c.grid.n);
    LabelSpace ls{3};
    for (int col : {0, 5, 40}) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(ls.size(), col);
        Eigen::VectorXd k = contract_labels(bs, M.matvec(expand_labels(bs, e))) / (ops.h * ops.h);
        CHECK((ops.H0.col(col) - U.col(col) - k).cwiseAbs().maxCoeff() < 1e-9 * ops.H0.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("noninteracting levels lie just below exact sums") {
    ProblemConfig c = small(14, 6, 0.0);
    Solution s = solve_problem(c);
    for (auto& b : s.blocks) {
        auto ex = exact_block_energies(*s.pb, s.basis, b.irrep);
        REQUIRE(ex.size() == b.energies.size());
        for (std::size_t r = 0; r < ex.size(); ++r) {
            const double e = b.energies[r] / s.omega();
            CHECK(e <= ex[r] + 1e-12);
            // low levels vary slowly on the lattice; oscillatory ones carry larger h^6 errors
            if (ex[r] < 5.01) CHECK(ex[r] - e < 5e-3);
        }
        CHECK(b.max_imag == 0.0);
    }
}

TEST_CASE("the two pencil modes agree to leading order") {
    ProblemConfig c = small(10, 3, 0.0);
    Solution a = solve_problem(c, {{"G11"}, false, {}});
    c.pencil = PencilMode::symmetrized;
    Solution b = solve_problem(c, {{"G11"}, false, {}});
    CHECK(std::fabs(a.blocks[0].energies[0] - b.blocks[0].energies[0]) / a.omega() < 1e-2);
    CHECK(a.blocks[0].asymmetry > 0);
}

TEST_CASE("row partners share spectra") {
    ProblemConfig c = small(8, 3, 1.0);
    Solution s = solve_problem(c, {{}, true, {}});
    const auto& irr = the_irreps();
    for (int q = 0; q < irr.size(); ++q) {
        if (irr[q].d != 2) continue;
        auto* a = s.find(q, 0);
        auto* b = s.find(q, 1);
        REQUIRE(a);
        REQUIRE(b);
        for (std::size_t r = 0; r < a->energies.size(); ++r)
            CHECK(std::fabs(a->energies[r] - b->energies[r]) / std::max(1.0, std::fabs(a->energies[r])) < 1e-9);
    }
}

TEST_CASE("repulsion raises every block ground level") {
    Solution s0 = solve_problem(small(8, 3, 0.0)), s1 = solve_problem(small(8, 3, 1.0));
    for (std::size_t i = 0; i < s0.blocks.size(); ++i)
        if (!s0.blocks[i].energies.empty()) CHECK(s1.blocks[i].energies[0] > s0.blocks[i].energies[0]);
}

TEST_CASE("state reconstruction is normalized") {
    Solution s = solve_problem(small(8, 3, 1.0), {{"G23"}, false, {}});
    GridFunction psi = block_state(s, s.blocks[0], 0);
    double n = 0;
    for (double v : psi) n += v * v;
    CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degeneracy report groups irreps") {
    Solution s = solve_problem(small(12, 3, 0.0));
    auto lv = degeneracy_report(s, 1e-5, 4.5);
    REQUIRE(lv.size() >= 3);
    CHECK(lv[0].degeneracy == 1);
    CHECK(lv[1].degeneracy == 4);  // first excited: two 2-D irreps
    CHECK(lv[1].irreps == std::vector<std::string>{"G15", "G24"});
}

TEST_CASE("power law fit") {
    std::vector<double> n{10, 20, 40}, e{1.0, 1.0 / 64, 1.0 / 4096};
    FitResult f = fit_power_law(n, e);
    CHECK(f.slope == doctest::Approx(6.0));
    CHECK(f.stderr_ < 1e-12);
    CHECK(f.monotone);
    e[2] = -1;
    CHECK_FALSE(fit_power_law(n, e).all_positive);
}

TEST_CASE("operator cache round trip") {
    ProblemConfig c = small(5, 2, 1.0);
    OscillatorBasis bs = make_basis(c.oscillator(), c.grid);
    SubspaceOperators ops = assemble_subspace_operators(c, bs);
    auto path = (std::filesystem::temp_directory_path() / "n4d_cache_test.bin").string();
    const std::string key = operator_cache_key(c);
    save_operators(path, key, ops);
    auto back = load_operators(path, key);
    REQUIRE(back);
    CHECK((back->H0 - ops.H0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back->C - ops.C).cwiseAbs().maxCoeff() == 0.0);
    c.coulomb_c = 2.0;
    CHECK_FALSE(load_operators(path, operator_cache_key(c)));
    std::remove(path.c_str());
}

TEST_CASE("levels table is deterministic") {
    Solution a = solve_problem(small(6, 2, 1.0)), b = solve_problem(small(6, 2, 1.0));
    std::ostringstream x, y;
    write_levels_csv(a, x);
    write_levels_csv(b, y);
    CHECK(x.str() == y.str());
    CHECK(manifest_json(a, -1) == manifest_json(b, -1));
    CHECK(x.str().rfind("irrep,row,r,E_over_omega,degeneracy\nG11,1,1,", 0) == 0);
}

TEST_CASE("memory budget is enforced") {
    ProblemConfig c = small(6, 3, 1.0);
    c.memory_budget = 1e4;
    OscillatorBasis bs = make_basis(c.oscillator(), c.grid);
    CHECK_THROWS_AS(assemble_subspace_operators(c, bs), std::runtime_error);
}
