#include <cmath>
#include <complex>

#include "doctest.h"
#include "mesormt/cumulants.hpp"
#include "mesormt/errors.hpp"

using namespace mesormt;

namespace {

double table_gap(const MomentTable& a, const MomentTable& b) {
    double worst = 0.0;
    for (int p = 0; p <= a.order; ++p)
        for (int q = 0; p + q <= a.order; ++q)
            worst = std::max(worst, std::abs(a.at(p, q) - b.at(p, q)));
    return worst;
}

} // namespace

TEST_SUITE("cumulants") {

TEST_CASE("moment tables built from laws satisfy the mirror symmetry") {
    DiscreteLaw law{{{cplx(0.3, 0.4), 0.25},
                     {cplx(-0.5, 0.1), 0.35},
                     {cplx(0.1, -0.6), 0.4}}};
    MomentTable m = law_moments(law, 6);
    CHECK(m.at(0, 0) == cplx(1.0, 0.0));
    CHECK_NOTHROW(m.validate());
    for (int p = 0; p <= 6; ++p)
        for (int q = 0; p + q <= 6; ++q)
            CHECK(std::abs(m.at(q, p) - std::conj(m.at(p, q))) < 1e-15);

    MomentTable bad(2);
    bad.at(0, 0) = 0.5;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("a point mass has one nonzero cumulant") {
    DiscreteLaw point{{{cplx(0.3, -0.4), 1.0}}};
    CumulantTable c = moments_to_cumulants(law_moments(point, 6));
    CHECK(std::abs(c.at(1, 0) - cplx(0.3, -0.4)) < 1e-14);
    CHECK(std::abs(c.at(0, 1) - cplx(0.3, 0.4)) < 1e-14);
    for (int p = 0; p <= 6; ++p)
        for (int q = 0; p + q <= 6; ++q)
            if (p + q >= 2) CHECK(std::abs(c.at(p, q)) < 1e-12);
}

TEST_CASE("complex gaussian cumulants vanish beyond second order") {
    GaussianLaw gl; // var 1/2 each component: E|h|^2 = 1, E h^2 = 0
    CumulantTable c = moments_to_cumulants(law_moments(gl, 6));
    CHECK(std::abs(c.at(1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(c.at(2, 0)) < 1e-12);
    for (int p = 0; p <= 6; ++p)
        for (int q = 0; p + q <= 6; ++q)
            if (p + q >= 3) CHECK(std::abs(c.at(p, q)) < 1e-10);

    GaussianLaw skew{0.75, 0.25}; // E h^2 = 0.75 - 0.25
    CumulantTable cs = moments_to_cumulants(law_moments(skew, 4));
    CHECK(std::abs(cs.at(2, 0) - 0.5) < 1e-13);
    CHECK(std::abs(cs.at(1, 1) - 1.0) < 1e-13);
}

TEST_CASE("symmetric two-point law: fourth cumulant is exactly -2") {
    DiscreteLaw rad{{{cplx(1, 0), 0.5}, {cplx(-1, 0), 0.5}}};
    MomentTable m = law_moments(rad, 6);
    // moments are 0/1 integers, so everything downstream is exact
    CHECK(m.at(2, 0) == cplx(1.0, 0.0));
    CHECK(m.at(1, 0) == cplx(0.0, 0.0));
    CumulantTable c = moments_to_cumulants(m);
    CHECK(c.at(2, 2) == cplx(-2.0, 0.0));
    CHECK(c.at(4, 0) == cplx(-2.0, 0.0));  // real law: depends on p+q only
    CHECK(c.at(1, 1) == cplx(1.0, 0.0));
    CHECK(c.at(3, 3) == cplx(16.0, 0.0)); // kappa_6 of +-1: 16
}

TEST_CASE("real laws produce degenerate tables with exact difference zeros") {
    DiscreteLaw law{{{cplx(0.5, 0), 0.4}, {cplx(-1, 0), 0.3}, {cplx(0.2, 0), 0.3}}};
    CumulantTable c = moments_to_cumulants(law_moments(law, 5));
    for (int p = 0; p + 1 <= 5; ++p)
        for (int q = 0; p + 1 + q <= 5; ++q) {
            // bitwise equality: the canonicalized table depends on p+q only
            CHECK(c.at(p + 1, q) == c.at(p, q + 1));
        }
}

TEST_CASE("moments -> cumulants -> moments round trip at order 6") {
    DiscreteLaw law{{{cplx(0.3, 0.4), 0.25},
                     {cplx(-0.5, 0.1), 0.35},
                     {cplx(0.1, -0.6), 0.4}}};
    MomentTable m = law_moments(law, 6);
    CHECK(table_gap(m, cumulants_to_moments(moments_to_cumulants(m))) < 1e-12);

    GaussianLaw gl{0.7, 0.3};
    MomentTable mg = law_moments(gl, 6);
    CHECK(table_gap(mg, cumulants_to_moments(moments_to_cumulants(mg))) < 1e-12);
}

TEST_CASE("gauss-hermite expectations are exact for polynomial moments") {
    GaussianLaw gl; // complex standard normal
    // E |h|^4 = 2, E |h|^2 = 1, E h^2 hbar = 0
    cplx m22 = law_expectation(gl, [](double x, double y) {
        const double n2 = x * x + y * y;
        return cplx(n2 * n2, 0);
    });
    CHECK(std::abs(m22 - 2.0) < 1e-13);
    GaussianLaw degenerate{1.0, 0.0}; // purely real normal
    cplx m4 = law_expectation(degenerate, [](double x, double) {
        return cplx(x * x * x * x, 0);
    });
    CHECK(std::abs(m4 - 3.0) < 1e-13);
}

TEST_CASE("finite-difference wirtinger derivatives match closed forms") {
    // f(z, zbar) = z^2 zbar through eval only
    WirtingerFunction f;
    f.eval = [](double x, double y) {
        const cplx z(x, y);
        return z * z * std::conj(z);
    };
    f.max_order = 2; // fd only trustworthy to total order 2
    const double x = 0.4, y = -0.3;
    const cplx z(x, y);
    CHECK(std::abs(f.wirtinger(1, 0, x, y) - 2.0 * z * std::conj(z)) < 1e-7);
    CHECK(std::abs(f.wirtinger(0, 1, x, y) - z * z) < 1e-7);
    CHECK(std::abs(f.wirtinger(1, 1, x, y) - 2.0 * z) < 1e-5);
}

TEST_CASE("polynomial wirtinger derivatives are exact at high order") {
    // f = 3 z^2 zbar^2 + (1+2i) z, coeff[p][q] multiplying z^p zbar^q
    WirtingerFunction f = z_polynomial(
        {{cplx(0, 0), cplx(0, 0), cplx(0, 0)},
         {cplx(1, 2), cplx(0, 0), cplx(0, 0)},
         {cplx(0, 0), cplx(0, 0), cplx(3, 0)}});
    const double x = 0.7, y = 0.2;
    const cplx z(x, y), zb = std::conj(z);
    CHECK(std::abs(f.wirtinger(1, 0, x, y) - (6.0 * z * zb * zb + cplx(1, 2))) <
          1e-13);
    CHECK(std::abs(f.wirtinger(2, 2, x, y) - 12.0) < 1e-12);
    CHECK(std::abs(f.wirtinger(3, 0, x, y)) < 1e-12);
    // eval matches the polynomial directly
    CHECK(std::abs(f.eval(x, y) -
                   (3.0 * z * z * zb * zb + cplx(1, 2) * z)) < 1e-14);
}

TEST_CASE("expansion identity converges as the order grows") {
    DiscreteLaw law{{{cplx(0.6, 0.2), 0.3},
                     {cplx(-0.4, 0.5), 0.3},
                     {cplx(-0.15, -0.525), 0.4}}};
    // degree-2 map: all wirtinger derivatives beyond total order 2 vanish,
    // so the identity is exact from ell = 2 on
    WirtingerFunction f = z_polynomial(
        {{cplx(0.2, 0), cplx(1, 0.5)}, {cplx(0, 1), cplx(0.7, 0)}});
    for (ExpansionMode mode : {ExpansionMode::standard, ExpansionMode::imaginary}) {
        const double g1 = expansion_check(f, law, 1, mode).gap;
        const double g2 = expansion_check(f, law, 2, mode).gap;
        const double g3 = expansion_check(f, law, 3, mode).gap;
        const double g4 = expansion_check(f, law, 4, mode).gap;
        CHECK(g1 > 1e-6); // first order genuinely misses the curvature
        CHECK(g2 < 1e-13);
        CHECK(g3 < 1e-13);
        CHECK(g4 < 1e-13);
        CHECK(g1 > g2);
    }
}

TEST_CASE("real law in imaginary mode is exactly zero on both sides") {
    DiscreteLaw real_law{
        {{cplx(1, 0), 0.5}, {cplx(-1, 0), 0.5}}};
    WirtingerFunction f = z_polynomial(
        {{cplx(1, 0), cplx(0.3, 0)}, {cplx(0.5, 0), cplx(0.2, 0)}});
    ExpansionCheckResult r =
        expansion_check(f, real_law, 3, ExpansionMode::imaginary);
    CHECK(r.lhs == cplx(0.0, 0.0));
    CHECK(r.rhs == cplx(0.0, 0.0));
    CHECK(r.gap == 0.0);
}

TEST_CASE("entry cumulant closed forms") {
    EntryCumulantPrediction p = entry_cumulant_predictions(0.5, 100);
    CHECK(p.c20_minus_c11 == doctest::Approx(-0.5 / 100).epsilon(1e-15));
    CHECK(p.c11_minus_c02 == doctest::Approx(0.5 / 100).epsilon(1e-15));
    CHECK(p.e_b2 == doctest::Approx(0.25 / 100).epsilon(1e-15));
    CHECK(p.third_order_bound ==
          doctest::Approx(std::sqrt(0.5) * std::pow(100.0, -1.5)).epsilon(1e-15));

    EntryCumulantPrediction goe = entry_cumulant_predictions(1.0, 50);
    CHECK(goe.c20_minus_c11 == 0.0);
    CHECK(goe.third_order_bound == 0.0);
}

} // TEST_SUITE
