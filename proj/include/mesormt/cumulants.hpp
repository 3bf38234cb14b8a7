#pragma once
// Bivariate cumulant calculus for a complex random variable h, treating
// (h, hbar) as the pair of arguments. Supplies moment <-> cumulant
// conversion, the two first-order expansion identities (the standard one
// weighted by C[p+1][q] and the variant weighted by C[p+1][q] - C[p][q+1]
// that extracts the imaginary part of h), and closed-form predictions for
// the low cumulants of matrix entries as functions of (sigma, N).

#include <complex>
#include <functional>
#include <variant>
#include <vector>

namespace mesormt {

using cplx = std::complex<double>;

// Entries m[p][q] = E h^p hbar^q for p + q <= order. m[0][0] = 1 and
// m[q][p] = conj(m[p][q]) always hold for tables built from a law.
struct MomentTable {
    int order = 0;
    std::vector<std::vector<cplx>> m;

    explicit MomentTable(int order_ = 0);
    const cplx& at(int p, int q) const;
    cplx& at(int p, int q);
    // Throws ParameterError unless m[0][0] = 1 and the conjugate mirror
    // symmetry holds to tol.
    void validate(double tol = 1e-9) const;
};

// Joint cumulants C[p][q] of (h, hbar), same triangular layout. For a
// real-valued h the table entries depend on p + q only; conversion code
// detects that case and enforces the degeneracy exactly so that the
// difference weights C[p+1][q] - C[p][q+1] vanish without roundoff.
struct CumulantTable {
    int order = 0;
    std::vector<std::vector<cplx>> c;

    explicit CumulantTable(int order_ = 0);
    const cplx& at(int p, int q) const;
    cplx& at(int p, int q);
};

CumulantTable moments_to_cumulants(const MomentTable& m);
MomentTable cumulants_to_moments(const CumulantTable& c);

// Finitely supported law: atoms (value, probability), probabilities
// summing to 1 within 1e-12. Expectations are exact finite sums.
struct DiscreteLaw {
    std::vector<std::pair<cplx, double>> atoms;
    void validate() const;
};

// h = x + i y with independent centered normals; expectations by
// Gauss-Hermite quadrature (exact for polynomial integrands of the
// orders used here).
struct GaussianLaw {
    double var_x = 0.5;
    double var_y = 0.5;
    void validate() const;
};

using EntryLawSpec = std::variant<DiscreteLaw, GaussianLaw>;

// E g(x, y) where h = x + i y.
cplx law_expectation(const EntryLawSpec& law,
                     const std::function<cplx(double, double)>& g);

MomentTable law_moments(const EntryLawSpec& law, int order);

// A scalar map f(h, hbar) given through its real coordinates. Derivatives
// in (x, y) either come from an exact evaluator or fall back to central
// finite differences of width fd_step with O(fd_step^2) truncation error;
// the roundoff of the difference quotient grows like eps / fd_step^(a+b),
// so the fallback is only trustworthy for a + b <= 2. Complex-step
// differentiation is not applicable: the maps are not holomorphic in h.
struct WirtingerFunction {
    std::function<cplx(double, double)> eval;
    // d^{a+b} f / dx^a dy^b; empty -> finite differences
    std::function<cplx(int, int, double, double)> partial_xy;
    int max_order = 2;
    double fd_step = 1e-4;

    cplx mixed_xy(int a, int b, double x, double y) const;
    // d^p_z d^q_zbar f via 2^{-(p+q)} sum_{a<=p, b<=q} binom(p,a) binom(q,b)
    // (-i)^{p-a} i^{q-b} d_x^{a+b} d_y^{p+q-a-b} f.
    cplx wirtinger(int p, int q, double x, double y) const;
};

// Polynomial sum c[p][q] z^p zbar^q with exact coordinate partials; the
// workhorse for expansion identity tests at orders where finite
// differences are hopeless.
WirtingerFunction z_polynomial(std::vector<std::vector<cplx>> coeff);

enum class ExpansionMode { standard, imaginary };

struct ExpansionCheckResult {
    cplx lhs;
    cplx rhs;
    double gap = 0.0;
    // rhs contribution of each derivative order k = 0..ell
    std::vector<cplx> order_terms;
};

// standard:  E f(h,hbar) h       vs  sum_{p+q<=ell} C[p+1][q]/(p! q!) E f^(p,q)
// imaginary: E f(h,hbar) (h-hbar) vs same with weights C[p+1][q] - C[p][q+1].
// Cumulants are taken from law_moments(law, ell + 1). The truncation
// remainder is not modelled; callers see the realized gap.
ExpansionCheckResult expansion_check(const WirtingerFunction& f,
                                     const EntryLawSpec& law, int ell,
                                     ExpansionMode mode);

// Closed forms for the entry cumulants of the ensembles sampled here:
// off-diagonal H_ij = a + i b with Var a = (1+sigma)/(2N),
// Var b = (1-sigma)/(2N) gives C20 - C11 = (sigma-1)/N and
// C11 - C02 = (1-sigma)/N; third-order cumulants are bounded by
// sqrt(1-sigma) N^{-3/2} up to the law's normalized third moments.
struct EntryCumulantPrediction {
    double c20_minus_c11 = 0.0;
    double c11_minus_c02 = 0.0;
    double e_b2 = 0.0;
    double third_order_bound = 0.0;
};

EntryCumulantPrediction entry_cumulant_predictions(double sigma, int N);

} // namespace mesormt
