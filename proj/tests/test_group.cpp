#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "n4d/group.hpp"

using namespace n4d;

TEST_CASE("group is closed, of order 32, and preserves the pair distance") {
    const Group& G = the_group();
    REQUIRE(G.order() == 32);
    IMat4 Q = pair_distance_form();
    std::set<IMat4> seen;
    for (int g = 0; g < 32; ++g) {
        const IMat4& r = G[g].r;
        seen.insert(r);
        CHECK(imat_mul(imat_transpose(r), r) == imat_mul(imat_transpose(G[0].r), G[0].r));
        CHECK(imat_mul(imat_mul(imat_transpose(r), Q), r) == Q);
        CHECK(G.mul(g, G.inverse(g)) == G.identity());
        for (int h = 0; h < 32; ++h) CHECK(G.find(imat_mul(r, G[h].r)) == G.mul(g, h));
    }
    CHECK(seen.size() == 32);
}

TEST_CASE("particle exchange and the box reflections are elements") {
    const Group& G = the_group();
    IMat4 swap{};
    swap[0][2] = swap[1][3] = swap[2][0] = swap[3][1] = 1;
    CHECK(G.find(swap) >= 0);
    IMat4 reflect{};
    reflect[0][0] = reflect[2][2] = -1;
    reflect[1][1] = reflect[3][3] = 1;
    CHECK(G.find(reflect) >= 0);
    IMat4 single{};
    single[0][0] = -1;
    single[1][1] = single[2][2] = single[3][3] = 1;
    CHECK(G.find(single) < 0);  // one particle alone cannot be reflected
}

TEST_CASE("irreducible representations") {
    const auto& irr = the_irreps();
    REQUIRE(irr.size() == 14);
    int d2 = 0, ones = 0, twos = 0;
    for (auto& ir : irr.all()) {
        d2 += ir.d * ir.d;
        (ir.d == 1 ? ones : twos) += 1;
    }
    CHECK(d2 == 32);
    CHECK(ones == 8);
    CHECK(twos == 6);
    CHECK(irr.check_homomorphism().empty());
    CHECK(irr.check_unitarity().empty());
    CHECK(irr.check_character_orthogonality().empty());
    CHECK(irr[0].label == "G11");
    CHECK(irr.index_of("G45") == 13);
    CHECK(classify_permutation("G23") == PermutationSymmetry::antisymmetric);
    CHECK(classify_permutation("G44") == PermutationSymmetry::symmetric);
}

TEST_CASE("label action agrees with the lattice action") {
    GridSpec g(5, 1.0);
    std::mt19937 rng(5);
    std::normal_distribution<double> u;
    // a product state built from parity-definite sampled vectors
    std::vector<std::vector<double>> f(3, std::vector<double>(5));
    for (int p = 0; p < 5; ++p) {
        double x = g.x(p + 1);
        f[0][p] = std::exp(-x * x);
        f[1][p] = x * std::exp(-x * x);
        f[2][p] = (x * x - 0.3) * std::exp(-x * x);
    }
    auto product = [&](const Label& k) {
        GridFunction v(g.size());
        for (std::size_t mu = 0; mu < g.size(); ++mu) {
            auto q = g.unflat(mu);
            v[mu] = f[k[0]][q[0] - 1] * f[k[1]][q[1] - 1] * f[k[2]][q[2] - 1] * f[k[3]][q[3] - 1];
        }
        return v;
    };
    const Group& G = the_group();
    Label k{0, 1, 2, 1};
    GridFunction v = product(k);
    for (int e = 0; e < 32; ++e) {
        auto [s, kp] = scalar_transform_labels(G[e], k);
        GridFunction a = scalar_transform_grid(G[e], v, g), b = product(kp);
        double err = 0;
        for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::fabs(a[i] - s * b[i]));
        CHECK(err < 1e-14);
    }
}

TEST_CASE("classes partition the label space") {
    for (int m : {2, 3, 5}) {
        auto cls = decompose_classes(m);
        CHECK(static_cast<long long>(cls.size()) == class_count_formula(m));
        int total = 0;
        for (auto& c : cls) {
            total += c.size();
            CHECK(c.rep == c.members.front());
        }
        CHECK(total == m * m * m * m);
    }
}

TEST_CASE("multiplicities at m = 8") {
    ProjectedBasis pb = project_basis(8);
    const int expect[14] = {210, 190, 120, 136, 320, 240, 256, 192, 320, 78, 66, 120, 136, 192};
    int total = 0;
    for (int q = 0; q < 14; ++q) {
        CHECK(pb.count(q) == expect[q]);
        total += the_irreps()[q].d * pb.count(q);
        for (int j = 0; j < the_irreps()[q].d; ++j) CHECK(pb.blocks[q][j].size() == pb.blocks[q][0].size());
    }
    CHECK(total == 4096);
}

TEST_CASE("projected vectors are orthonormal and transform as the row") {
    const int m = 3;
    ProjectedBasis pb = project_basis(m);
    LabelSpace ls{m};
    const auto& irr = the_irreps();
    const Group& G = the_group();
    std::vector<std::vector<double>> all;
    for (int q = 0; q < irr.size(); ++q)
        for (int j = 0; j < irr[q].d; ++j)
            for (auto& v : pb.blocks[q][j]) {
                std::vector<double> d(ls.size(), 0.0);
                for (auto& [i, c] : v.v.c) d[i] = c;
                all.push_back(d);
                // P_jj v = v
                SparseVec w = apply_projector(irr[q], j, j, v.v, ls);
                std::vector<double> dw(ls.size(), 0.0);
                for (auto& [i, c] : w.c) dw[i] = c;
                double e = 0;
                for (int i = 0; i < ls.size(); ++i) e = std::max(e, std::fabs(dw[i] - d[i]));
                CHECK(e < 1e-10);
            }
    REQUIRE(static_cast<int>(all.size()) == ls.size());
    for (std::size_t a = 0; a < all.size(); ++a)
        for (std::size_t b = a; b < all.size(); ++b) {
            double s = 0;
            for (int i = 0; i < ls.size(); ++i) s += all[a][i] * all[b][i];
            CHECK(std::fabs(s - (a == b ? 1.0 : 0.0)) < 1e-10);
        }
    (void)G;
}

TEST_CASE("projectors are idempotent and complete on random vectors at m = 8") {
    const int m = 8;
    LabelSpace ls{m};
    const auto& irr = the_irreps();
    std::mt19937 rng(1);
    std::normal_distribution<double> u;
    SparseVec v;
    for (int i = 0; i < ls.size(); ++i) v.c.emplace_back(i, u(rng));
    std::vector<double> sum(ls.size(), 0.0);
    double worst = 0;
    for (int q = 0; q < irr.size(); ++q)
        for (int j = 0; j < irr[q].d; ++j) {
            SparseVec a = apply_projector(irr[q], j, j, v, ls);
            SparseVec b = apply_projector(irr[q], j, j, a, ls);
            std::vector<double> da(ls.size(), 0.0), db(ls.size(), 0.0);
            for (auto& [i, c] : a.c) da[i] = c;
            for (auto& [i, c] : b.c) db[i] = c;
            for (int i = 0; i < ls.size(); ++i) {
                worst = std::max(worst, std::fabs(da[i] - db[i]));
                sum[i] += da[i];
            }
        }
    CHECK(worst < 1e-10);
    double e = 0;
    for (auto& [i, c] : v.c) e = std::max(e, std::fabs(sum[i] - c));
    CHECK(e < 1e-10);
}
