#include <doctest.h>

#include <cmath>
#include <sstream>

#include "n4d/oscillator.hpp"

using namespace n4d;

TEST_CASE("Kummer function against reference values") {
    CHECK(double(kummer_M(0.3L, 0.5L, 0.0L)) == doctest::Approx(1.0));
    CHECK(double(kummer_M(1.5L, 1.5L, 2.0L)) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(double(kummer_M(-1.0L, 0.5L, 3.0L)) == doctest::Approx(1.0 - 2.0 * 3.0));
    CHECK(double(kummer_M(-1.0L, 1.5L, 3.0L)) == doctest::Approx(1.0 - 2.0 * 3.0 / 3.0));
    // mpmath hyp1f1 at 30 digits
    CHECK(double(kummer_M(-0.3L, 0.5L, 15.8L)) == doctest::Approx(-352751.1787294999444).epsilon(1e-12));
    CHECK(double(kummer_M(-2.7L, 1.5L, 15.8L)) == doctest::Approx(-368.15461089300840273).epsilon(1e-12));
    CHECK(double(kummer_M(0.25L, 0.5L, 3.0L)) == doctest::Approx(8.4214059843943099762).epsilon(1e-13));
    CHECK(double(kummer_M(-5.5L, 0.5L, 20.0L)) == doctest::Approx(16783.404646833307152).epsilon(1e-11));
}

TEST_CASE("Kummer series reports non-convergence") {
    KummerOptions o;
    o.max_terms = 5;
    CHECK_THROWS_AS(kummer_M(0.5L, 0.5L, 30.0L, o), std::runtime_error);
}

TEST_CASE("confined levels reproduce the tabulated values") {
    static const double table[] = {0.000001, 1.000017, 2.000235, 3.001945, 4.010898, 5.043776,
                                   6.132232, 7.315886, 8.628132, 10.088573, 11.705530, 13.481490,
                                   15.416694, 17.510727, 19.763071, 22.173266};
    auto spec = OscillatorSpec::from_omega2_half(500.0, 1.0, 16);
    CHECK(spec.omega == doctest::Approx(std::sqrt(1000.0)));
    OscillatorBasis bs = find_levels(spec);
    REQUIRE(bs.m() == 16);
    for (int i = 0; i < 16; ++i) {
        CHECK(std::fabs(double(bs.nu[i]) - table[i]) < 1e-6);
        CHECK(bs.parity[i] == (i % 2 == 0 ? 1 : -1));
        CHECK(std::fabs(double(level_condition(bs.nu[i], bs.parity[i], spec))) < 1e-9);
    }
}

TEST_CASE("wide box approaches the free oscillator") {
    auto spec = OscillatorSpec::from_omega2_half(500.0, 3.0, 4);
    OscillatorBasis bs = find_levels(spec);
    for (int i = 0; i < 4; ++i) CHECK(double(bs.nu[i]) == doctest::Approx(i).epsilon(1e-9));
}

TEST_CASE("sampled states are parity definite and normalized") {
    GridSpec g(30, 1.0);
    OscillatorBasis bs = make_basis(OscillatorSpec::from_omega2_half(500.0, 1.0, 8), g);
    for (int k = 0; k < 8; ++k) {
        CHECK(bs.phi.col(k).squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
        for (int p = 0; p < 30; ++p) CHECK(bs.phi(p, k) == bs.parity[k] * bs.phi(29 - p, k));
    }
    // ground state is nodeless
    for (int p = 0; p < 30; ++p) CHECK(bs.phi(p, 0) > 0);
    CHECK(noninteracting_energy({0, 0, 0, 0}, bs) == doctest::Approx(2.0 + 4 * double(bs.nu[0])));
    std::ostringstream os;
    write_levels_csv(bs, os);
    CHECK(os.str().rfind("index,parity,nu", 0) == 0);
}
