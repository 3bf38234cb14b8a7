#pragma once
// Resolvent diagnostics: entrywise and trace residuals against the local
// semicircle law, power-trace magnitude checks, and the mixed products of
// G = (H - z)^{-1} with conjugated, transposed, and adjoint copies of
// F = (H - z')^{-1}, compared to their leading mesoscopic predictions.
//
// Everything is computed in the eigenbasis H = U diag(lambda) U^*. Writing
// d_k = 1/(lambda_k - z), d'_k = 1/(lambda_k - z'), c_k = 1/(lambda_k -
// conj(z')) and S = U^T U (symmetric, = identity for real U), all the
// products reduce to weighted sums with the real weights |S_kl|^2:
//   (1/N) tr G^2 Fbar = (1/N) sum_{kl} d_k^2 c_l  |S_kl|^2
//   (1/N) tr G  Fbar = (1/N) sum_{kl} d_k   c_l  |S_kl|^2
//   (1/N) tr G  F^T  = (1/N) sum_{kl} d_k   d'_l |S_kl|^2
//   (1/N) tr G^2 F^T  = (1/N) sum_{kl} d_k^2 d'_l |S_kl|^2
//   (1/N) tr G^2 F    = (1/N) sum_k  d_k^2 d'_k
//   (1/N) tr G^2 F*   = (1/N) sum_k  d_k^2 c_k
// so transposes and conjugations never require re-solving.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "mesormt/ensembles.hpp"
#include "mesormt/linear_stats.hpp"

namespace mesormt {

// (1/N) sum_i 1/(lambda_i - z); the empirical Stieltjes transform.
cplx resolvent_trace(const std::vector<double>& lambda, cplx z);

struct ComplexMatrix {
    int n = 0;
    std::vector<cplx> a; // column-major

    cplx operator()(int i, int j) const { return a[size_t(j) * n + i]; }
    cplx& at(int i, int j) { return a[size_t(j) * n + i]; }
};

// Dense G = (H - z)^{-1} through the eigensystem; verifies the backward
// residual max_ij |((H - z) G - I)_ij| <= residual_tol before returning.
ComplexMatrix resolvent_entries(const HermitianMatrix& H, cplx z,
                                double residual_tol = 1e-9);

// One named residual measured against its control scale.
struct DiagnosticRow {
    std::string label;
    double value = 0.0;
    double control = 0.0;
    double ratio = 0.0; // value / control
};

struct DiagnosticsReport {
    std::vector<DiagnosticRow> rows;
};

// min(alpha, 1 - alpha)/2: the mesoscopic error exponent.
double chi_exponent(double alpha);

// alpha with eta = Im z = N^{-alpha}.
double alpha_of(cplx z, int N);

// max_ij |G_ij - delta_ij m(z)| against sqrt(Im m/(N eta)) + 1/(N eta), and
// |(1/N) tr G - m(z)| against 1/(N eta).
DiagnosticsReport local_law_residuals(const Eigensystem& es, cplx z);
DiagnosticsReport local_law_residuals(const HermitianMatrix& H, cplx z);

// Magnitude checks for G^k: trace distance to the deterministic limit
// (k = 1: |ul G - m| vs N^{alpha-1-chi}; k = 2: |ul G^2| vs N^{alpha-chi}),
// optional batch-centered trace vs N^{(k-1)alpha-(1-alpha)}, and max
// diagonal / off-diagonal entries vs N^{(k-1)alpha} and
// N^{(k-1)alpha-(1-alpha)/2}. The expectation proxy for the centered check
// is supplied by the caller (sample mean over a batch).
DiagnosticsReport power_trace_bound_check(
    const Eigensystem& es, cplx z, int k,
    std::optional<cplx> expectation_proxy = std::nullopt);
DiagnosticsReport power_trace_bound_check(
    const HermitianMatrix& H, cplx z, int k,
    std::optional<cplx> expectation_proxy = std::nullopt);

enum class ProductKind { G2Fbar, GFbar, GFt, G2Ft, G2F, G2Fstar };

const char* product_kind_name(ProductKind kind);
ProductKind product_kind_from_string(const std::string& s);

struct ProductTraceResult {
    ProductKind kind;
    cplx empirical; // (1/N) tr of the product
    // leading mean prediction where the theory supplies one:
    //   G2Fbar : -(m(z) - m(conj z')) / nu^2,
    //            nu = z - conj z' + (1 - sigma)(m(z) - m(conj z'))
    //   G2Fstar: -(m(z) - m(conj z')) / (z - conj z')^2
    std::optional<cplx> predicted;
    // N^power scale: the error scale of the prediction when one exists
    // (N^{2 alpha - chi}), otherwise the magnitude bound for the kind
    double scale = 0.0;
    // true when the scale bounds |value - E value| rather than |value|
    // (GFbar fluctuation bound N^{2 alpha - 1}); the caller centers at a
    // batch mean
    bool centered_bound = false;
};

// Shares one eigendecomposition and one S = U^T U across the six products.
class ResolventProducts {
  public:
    explicit ResolventProducts(Eigensystem es);

    const Eigensystem& eigensystem() const { return es_; }

    ProductTraceResult trace_vs_prediction(cplx z, cplx zprime,
                                           ProductKind which,
                                           double sigma) const;

  private:
    Eigensystem es_;
    std::vector<double> s_abs2_; // |S_kl|^2, column-major
};

// Convenience: decompose H and evaluate a single product.
ProductTraceResult product_trace_vs_prediction(const HermitianMatrix& H,
                                               cplx z, cplx zprime,
                                               ProductKind which, double sigma);

} // namespace mesormt
