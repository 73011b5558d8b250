#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "n4d/kron.hpp"

using namespace n4d;

namespace {

std::vector<double> sorted_dense_eigs(const DirectPolyMatrix& m) {
    Eigen::MatrixXd d = assemble_dense(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().data(), es.eigenvalues().data() + d.rows()};
}

std::vector<double> sorted_oracle(const SpectralOracle& o, SpectralOracle::Which w) {
    std::vector<double> v;
    const int n = o.n();
    for (int l = 1; l <= n; ++l)
        for (int k = 1; k <= n; ++k)
            for (int i = 1; i <= n; ++i)
                for (int p = 1; p <= n; ++p) v.push_back(o.spectrum(w, {p, i, k, l}));
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("A is the tridiagonal shift sum") {
    Eigen::MatrixXd A = build_A(4);
    CHECK(A(0, 1) == 1.0);
    CHECK(A(1, 0) == 1.0);
    CHECK(A(0, 0) == 0.0);
    CHECK(A(0, 2) == 0.0);
    // eigenvalues 2 cos(k pi/(n+1))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(es.eigenvalues()(3) == doctest::Approx(2 * std::cos(M_PI / 5)));
}

TEST_CASE("dense spectra match the closed forms") {
    for (int n : {2, 3, 4}) {
        SpectralOracle o(n);
        using W = SpectralOracle::Which;
        std::vector<std::pair<DirectPolyMatrix, W>> cases = {{build_Mi(1, n), W::M1}, {build_Mi(2, n), W::M2},
                                                             {build_Mi(3, n), W::M3}, {build_Mi(4, n), W::M4},
                                                             {build_M(n), W::M},      {build_N(n, default_gamma_prime()), W::N}};
        for (auto& [m, w] : cases) {
            auto a = sorted_dense_eigs(m), b = sorted_oracle(o, w);
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) < 1e-11);
        }
    }
}

TEST_CASE("M and N commute") {
    Eigen::MatrixXd M = assemble_dense(build_M(4)), N = assemble_dense(build_N(4, default_gamma_prime()));
    CHECK((M * N - N * M).cwiseAbs().maxCoeff() <= 1e-13);

    const int n = 20;
    auto Mo = build_M(n), No = build_N(n, default_gamma_prime());
    std::mt19937_64 rng(11);
    std::normal_distribution<double> u;
    GridFunction x(Mo.dim());
    for (double& v : x) v = u(rng);
    GridFunction a = Mo.matvec(No.matvec(x)), b = No.matvec(Mo.matvec(x));
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
    CHECK(e <= 1e-12);
}

TEST_CASE("eigenvalue on sine products matches matvec") {
    const int n = 7;
    auto M = build_M(n);
    GridSpec g(n, 1.0);
    std::array<int, 4> k{2, 1, 3, 5};
    GridFunction v(g.size());
    for (std::size_t mu = 0; mu < g.size(); ++mu) {
        auto q = g.unflat(mu);
        double s = 1;
        for (int a = 0; a < 4; ++a) s *= std::sin(M_PI * k[a] * q[a] / (n + 1));
        v[mu] = s;
    }
    GridFunction w = M.matvec(v);
    const double lam = M.eigenvalue(k);
    CHECK(lam == doctest::Approx(SpectralOracle(n).spectrum(SpectralOracle::Which::M, k)).epsilon(1e-12));
    for (std::size_t mu = 0; mu < g.size(); mu += 97) CHECK(w[mu] == doctest::Approx(lam * v[mu]).epsilon(1e-10));
}

TEST_CASE("csr assembly and the budget guard") {
    auto N = build_N(3, default_gamma_prime());
    SparseRM s = assemble_csr(N);
    Eigen::MatrixXd d = assemble_dense(N);
    CHECK((Eigen::MatrixXd(s) - d).cwiseAbs().maxCoeff() == 0.0);
    CsrOptions tiny;
    tiny.budget_bytes = 1000;
    CHECK_THROWS(assemble_csr(N, tiny));
    std::ostringstream os;
    dump_coordinate(s, os);
    CHECK(os.str().find("1 1 ") == 0);
}

TEST_CASE("nonzero counts follow the formulas") {
    for (int n : {3, 5, 10}) {
        auto a = nnz_counted(n), b = nnz_formulas(n);
        for (int i = 0; i < 4; ++i) CHECK(a.mi[i] == b.mi[i]);
        CHECK(a.m == b.m);
        CHECK(a.nmat == b.nmat);
        CHECK(a.lhs == b.lhs);
    }
    // the first matrix has 9 diagonals per axis-pair pattern: (3n-2)^4 ... leading terms
    auto r = nnz_formulas(200);
    CHECK(double(r.m) / r.leading_m() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(double(r.nmat) / r.leading_n() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("corner values bound the spectra") {
    for (int n : {3, 4}) {
        SpectralOracle o(n);
        auto th = sorted_oracle(o, SpectralOracle::Which::M);
        auto la = sorted_oracle(o, SpectralOracle::Which::N);
        CHECK(o.theta_min() == doctest::Approx(th.front()).epsilon(1e-12));
        CHECK(o.theta_max() == doctest::Approx(th.back()).epsilon(1e-12));
        CHECK(o.lambda_min() == doctest::Approx(la.front()).epsilon(1e-12));
        CHECK(o.lambda_max() == doctest::Approx(la.back()).epsilon(1e-12));
    }
}

TEST_CASE("N loses definiteness above the threshold gamma'") {
    CHECK(SpectralOracle(2000, default_gamma_prime()).lambda_min() > 0);
    CHECK(SpectralOracle(2000, Rational(65, 10000)).lambda_min() < 0);
}

TEST_CASE("Laplacian ground level") {
    for (int n : {10, 20, 40}) {
        SpectralOracle o(n);
        const double rel = (4 * M_PI * M_PI - o.ground_state()) / (4 * M_PI * M_PI);
        CHECK(rel > 0);
        CHECK(rel / ground_state_asymptotic_error(n) < 2.0);
        CHECK(rel / ground_state_asymptotic_error(n) > 0.5);
    }
}
