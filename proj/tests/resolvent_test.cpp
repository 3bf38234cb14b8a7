#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "mesormt/ensembles.hpp"
#include "mesormt/errors.hpp"
#include "mesormt/linear_stats.hpp"
#include "mesormt/resolvent.hpp"
#include "mesormt/spectral.hpp"

using namespace mesormt;

namespace {

// dense normalized trace of A * B for the 6 product shapes; quadratic-cost
// reference against the shared-eigensystem path
cplx tr_norm(const ComplexMatrix& A, const ComplexMatrix& B,
             char shape /* 'n', 'c'=conj, 't'=transpose, 's'=star */) {
    const int n = A.n;
    cplx acc = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            cplx rhs;
            switch (shape) {
                case 'n': rhs = B(b, a); break;
                case 'c': rhs = std::conj(B(b, a)); break;
                case 't': rhs = B(a, b); break;
                default:  rhs = std::conj(B(a, b)); break;
            }
            acc += A(a, b) * rhs;
        }
    return acc / double(n);
}

ComplexMatrix matmul(const ComplexMatrix& A, const ComplexMatrix& B) {
    const int n = A.n;
    ComplexMatrix C;
    C.n = n;
    C.a.assign(size_t(n) * n, cplx(0, 0));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const cplx b = B(k, j);
            for (int i = 0; i < n; ++i) C.at(i, j) += A(i, k) * b;
        }
    return C;
}

} // namespace

TEST_SUITE("resolvent") {

TEST_CASE("normalized trace at a frozen two-point spectrum") {
    // eigenvalues -1, +1 at z=i: (1/2)(1/(-1-i) + 1/(1-i)) = i/2
    const cplx t = resolvent_trace({-1.0, 1.0}, cplx(0, 1));
    CHECK(std::abs(t - cplx(0, 0.5)) < 1e-15);
    CHECK_THROWS_AS(resolvent_trace({1.0}, cplx(0.5, 0.0)), ParameterError);
    CHECK_THROWS_AS(resolvent_trace({}, cplx(0, 1)), ParameterError);
}

TEST_CASE("exponent helpers") {
    CHECK(chi_exponent(0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(chi_exponent(0.2) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(chi_exponent(0.8) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(alpha_of(cplx(0.3, 0.1), 100) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dense resolvent satisfies its defining equation") {
    EnsembleSpec spec;
    spec.N = 40;
    spec.sigma = 0.3;
    spec.master_seed = 13;
    HermitianMatrix H = sample_wigner(spec, 0);
    const cplx z(0.2, 0.5);
    ComplexMatrix G = resolvent_entries(H, z);

    // (H - z) G = I, checked by hand
    double worst = 0.0;
    for (int j = 0; j < spec.N; ++j)
        for (int i = 0; i < spec.N; ++i) {
            cplx acc = -z * G(i, j);
            for (int k = 0; k < spec.N; ++k) acc += H(i, k) * G(k, j);
            worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-11);

    // an impossible residual demand trips the numerical guard
    CHECK_THROWS_AS(resolvent_entries(H, z, 1e-30), NumericalError);
}

TEST_CASE("resolvent difference identity across two spectral points") {
    EnsembleSpec spec;
    spec.N = 80;
    spec.sigma = 0.0;
    spec.master_seed = 23;
    HermitianMatrix H = sample_wigner(spec, 1);
    const cplx z(0.1, 0.3), zp(-0.4, 0.2);
    ComplexMatrix G = resolvent_entries(H, z);
    ComplexMatrix F = resolvent_entries(H, zp);

    // (G(z) - G(z'))/(z - z') = G(z) G(z') in normalized trace
    cplx lhs = 0.0;
    for (int i = 0; i < spec.N; ++i) lhs += G(i, i) - F(i, i);
    lhs /= double(spec.N) * (z - zp);
    const cplx rhs = tr_norm(G, F, 'n');
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
}

TEST_CASE("shared-eigensystem products match dense references") {
    EnsembleSpec spec;
    spec.N = 120;
    spec.sigma = 0.5;
    spec.master_seed = 29;
    HermitianMatrix H = sample_wigner(spec, 2);
    const double eta = 1.0 / std::sqrt(120.0);
    const cplx z(0.1, eta), zp(-0.2, eta);

    ComplexMatrix G = resolvent_entries(H, z);
    ComplexMatrix F = resolvent_entries(H, zp);
    ComplexMatrix G2 = matmul(G, G);

    ResolventProducts rp(eigensystem(H));
    auto check = [&](ProductKind kind, const ComplexMatrix& left, char shape) {
        const ProductTraceResult r =
            rp.trace_vs_prediction(z, zp, kind, spec.sigma);
        const cplx dense = tr_norm(left, F, shape);
        INFO(product_kind_name(kind));
        CHECK(std::abs(r.empirical - dense) < 1e-8 * (1.0 + std::abs(dense)));
        CHECK(r.scale > 0.0);
    };
    check(ProductKind::G2Fbar, G2, 'c');
    check(ProductKind::GFbar, G, 'c');
    check(ProductKind::GFt, G, 't');
    check(ProductKind::G2Ft, G2, 't');
    check(ProductKind::G2F, G2, 'n');
    check(ProductKind::G2Fstar, G2, 's');
}

TEST_CASE("prediction plumbing carries the right shapes") {
    EnsembleSpec spec;
    spec.N = 60;
    spec.sigma = 0.5;
    spec.master_seed = 3;
    HermitianMatrix H = sample_wigner(spec, 0);
    const cplx z(0.0, 0.2), zp(0.1, 0.2);
    ResolventProducts rp(eigensystem(H));

    auto g2fbar = rp.trace_vs_prediction(z, zp, ProductKind::G2Fbar, 0.5);
    REQUIRE(bool(g2fbar.predicted));
    const cplx dm = stieltjes_m(z) - stieltjes_m(std::conj(zp));
    const cplx nu = z - std::conj(zp) + (1.0 - 0.5) * dm;
    CHECK(std::abs(*g2fbar.predicted - (-dm / (nu * nu))) < 1e-13);

    auto g2fstar = rp.trace_vs_prediction(z, zp, ProductKind::G2Fstar, 0.5);
    REQUIRE(bool(g2fstar.predicted));
    const cplx d = z - std::conj(zp);
    CHECK(std::abs(*g2fstar.predicted - (-dm / (d * d))) < 1e-13);

    auto gfbar = rp.trace_vs_prediction(z, zp, ProductKind::GFbar, 0.5);
    CHECK_FALSE(bool(gfbar.predicted));
    CHECK(gfbar.centered_bound);
    for (ProductKind kind :
         {ProductKind::GFt, ProductKind::G2Ft, ProductKind::G2F}) {
        auto r = rp.trace_vs_prediction(z, zp, kind, 0.5);
        CHECK_FALSE(bool(r.predicted));
        CHECK_FALSE(r.centered_bound);
    }

    // convenience wrapper reproduces the class path
    auto direct =
        product_trace_vs_prediction(H, z, zp, ProductKind::G2Fbar, 0.5);
    CHECK(direct.empirical == g2fbar.empirical);
}

TEST_CASE("orthogonal-class samples collapse conj and star products") {
    EnsembleSpec spec;
    spec.N = 80;
    spec.sigma = 1.0;
    spec.master_seed = 41;
    HermitianMatrix H = sample_wigner(spec, 1);
    const cplx z(0.1, 0.25), zp(-0.15, 0.3);
    ResolventProducts rp(eigensystem(H));
    auto a = rp.trace_vs_prediction(z, zp, ProductKind::G2Fbar, 1.0);
    auto b = rp.trace_vs_prediction(z, zp, ProductKind::G2Fstar, 1.0);
    // real eigenvectors: conjugating F is the same as adjointing it
    CHECK(std::abs(a.empirical - b.empirical) < 1e-10 * std::abs(b.empirical));
    // nu loses its sigma term, so the two predictions coincide
    CHECK(std::abs(*a.predicted - *b.predicted) < 1e-14);

    // and the transpose products collapse onto the plain ones
    auto t = rp.trace_vs_prediction(z, zp, ProductKind::G2Ft, 1.0);
    auto p = rp.trace_vs_prediction(z, zp, ProductKind::G2F, 1.0);
    CHECK(std::abs(t.empirical - p.empirical) < 1e-10 * std::abs(p.empirical));
}

TEST_CASE("local law and power bounds hold on a fixed draw") {
    EnsembleSpec spec;
    spec.N = 400;
    spec.sigma = 0.0;
    spec.master_seed = 57;
    HermitianMatrix H = sample_wigner(spec, 0);
    Eigensystem es = eigensystem(H);
    const double eta = 1.0 / std::sqrt(400.0);
    const cplx z(0.0, eta);

    DiagnosticsReport ll = local_law_residuals(es, z);
    REQUIRE(ll.rows.size() == 2);
    CHECK(ll.rows[0].label == "entry_max");
    CHECK(ll.rows[1].label == "trace");
    for (const auto& row : ll.rows) {
        INFO(row.label);
        CHECK(row.ratio < 10.0);
        CHECK(row.ratio == doctest::Approx(row.value / row.control));
    }
    // matrix overload agrees
    DiagnosticsReport ll2 = local_law_residuals(H, z);
    CHECK(ll2.rows[0].value == doctest::Approx(ll.rows[0].value).epsilon(1e-9));

    for (int k : {1, 2, 3}) {
        DiagnosticsReport pw = power_trace_bound_check(es, z, k);
        for (const auto& row : pw.rows) {
            INFO("k=", k, " ", row.label);
            CHECK(row.ratio < 10.0);
        }
    }
    // centered row appears only with a proxy
    DiagnosticsReport pc = power_trace_bound_check(es, z, 2, cplx(0.0, 0.0));
    bool has_centered = false;
    for (const auto& row : pc.rows)
        has_centered = has_centered || row.label == "g2_trace_centered";
    CHECK(has_centered);
}

} // TEST_SUITE
