#include "mesormt/resolvent.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>

#include "mesormt/errors.hpp"
#include "mesormt/spectral.hpp"

namespace mesormt {

namespace {

void require_upper(cplx z, const char* who) {
    if (!(z.imag() > 0.0))
        throw ParameterError(std::string(who) + ": Im z must be positive");
}

// Entries of U diag(f) U^*: scale the columns of U, one zgemm.
ComplexMatrix eigen_apply(const Eigensystem& es, const std::vector<cplx>& f) {
    const int n = es.n;
    std::vector<cplx> b(size_t(n) * n);
    for (int k = 0; k < n; ++k) {
        const cplx fk = f[k];
        const cplx* src = es.U.data() + size_t(k) * n;
        cplx* dst = b.data() + size_t(k) * n;
        for (int i = 0; i < n; ++i) dst[i] = src[i] * fk;
    }
    ComplexMatrix out;
    out.n = n;
    out.a.assign(size_t(n) * n, cplx(0.0));
    const cplx one = 1.0, zero = 0.0;
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasConjTrans, n, n, n, &one,
                b.data(), n, es.U.data(), n, &zero, out.a.data(), n);
    return out;
}

std::vector<cplx> shifted_inverses(const std::vector<double>& lambda, cplx z,
                                   int power) {
    std::vector<cplx> d(lambda.size());
    for (size_t i = 0; i < lambda.size(); ++i) {
        cplx base = 1.0 / (lambda[i] - z);
        cplx v = base;
        for (int p = 1; p < power; ++p) v *= base;
        d[i] = v;
    }
    return d;
}

} // namespace

cplx resolvent_trace(const std::vector<double>& lambda, cplx z) {
    if (z.imag() == 0.0)
        throw ParameterError("resolvent trace needs Im z != 0");
    if (lambda.empty()) throw ParameterError("empty spectrum");
    cplx acc = 0.0;
    for (double l : lambda) acc += 1.0 / (l - z);
    return acc / double(lambda.size());
}

ComplexMatrix resolvent_entries(const HermitianMatrix& H, cplx z,
                                double residual_tol) {
    if (z.imag() == 0.0)
        throw ParameterError("resolvent needs Im z != 0");
    Eigensystem es = eigensystem(H);
    ComplexMatrix G = eigen_apply(es, shifted_inverses(es.lambda, z, 1));

    // backward check (H - z) G = I; the row-major Hermitian buffer read
    // column-major is H^T, so ask for its transpose
    const int n = es.n;
    std::vector<cplx> p(size_t(n) * n);
    const cplx one = 1.0, zero = 0.0;
    cblas_zgemm(CblasColMajor, CblasTrans, CblasNoTrans, n, n, n, &one,
                H.a.data(), n, G.a.data(), n, &zero, p.data(), n);
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx r = p[size_t(j) * n + i] - z * G(i, j);
            if (i == j) r -= 1.0;
            worst = std::max(worst, std::abs(r));
        }
    if (!(worst <= residual_tol))
        throw NumericalError("resolvent residual " + std::to_string(worst) +
                                 " exceeds tolerance",
                             worst);
    return G;
}

double chi_exponent(double alpha) {
    return 0.5 * std::min(alpha, 1.0 - alpha);
}

double alpha_of(cplx z, int N) {
    require_upper(z, "alpha_of");
    if (N < 2) throw ParameterError("alpha_of needs N >= 2");
    return -std::log(z.imag()) / std::log(double(N));
}

DiagnosticsReport local_law_residuals(const Eigensystem& es, cplx z) {
    require_upper(z, "local_law_residuals");
    const int n = es.n;
    if (n == 0) throw ParameterError("empty eigensystem");
    const double eta = z.imag();
    const cplx m = stieltjes_m(z);
    const double neta = double(n) * eta;

    ComplexMatrix G = eigen_apply(es, shifted_inverses(es.lambda, z, 1));
    double entry_max = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            cplx r = G(i, j);
            if (i == j) r -= m;
            entry_max = std::max(entry_max, std::abs(r));
        }

    DiagnosticsReport rep;
    const double entry_control = std::sqrt(m.imag() / neta) + 1.0 / neta;
    rep.rows.push_back({"entry_max", entry_max, entry_control,
                        entry_max / entry_control});
    const double trace_res = std::abs(resolvent_trace(es.lambda, z) - m);
    rep.rows.push_back(
        {"trace", trace_res, 1.0 / neta, trace_res * neta});
    return rep;
}

DiagnosticsReport local_law_residuals(const HermitianMatrix& H, cplx z) {
    return local_law_residuals(eigensystem(H), z);
}

DiagnosticsReport power_trace_bound_check(
    const Eigensystem& es, cplx z, int k,
    std::optional<cplx> expectation_proxy) {
    require_upper(z, "power_trace_bound_check");
    if (k < 1) throw ParameterError("power must be >= 1");
    const int n = es.n;
    if (n == 0) throw ParameterError("empty eigensystem");
    const double N = double(n);
    const double alpha = alpha_of(z, n);
    const double chi = chi_exponent(alpha);
    const std::string tag = "g" + std::to_string(k) + "_";

    const std::vector<cplx> dk = shifted_inverses(es.lambda, z, k);
    cplx trace = 0.0;
    for (const cplx& v : dk) trace += v;
    trace /= N;

    DiagnosticsReport rep;
    if (k == 1) {
        double r = std::abs(trace - stieltjes_m(z));
        double c = std::pow(N, alpha - 1.0 - chi);
        rep.rows.push_back({tag + "trace_vs_limit", r, c, r / c});
    } else if (k == 2) {
        double r = std::abs(trace);
        double c = std::pow(N, alpha - chi);
        rep.rows.push_back({tag + "trace_scale", r, c, r / c});
    }
    if (expectation_proxy) {
        double r = std::abs(trace - *expectation_proxy);
        double c = std::pow(N, (k - 1) * alpha - (1.0 - alpha));
        rep.rows.push_back({tag + "trace_centered", r, c, r / c});
    }

    ComplexMatrix Gk = eigen_apply(es, dk);
    double diag_max = 0.0, off_max = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double v = std::abs(Gk(i, j));
            if (i == j)
                diag_max = std::max(diag_max, v);
            else
                off_max = std::max(off_max, v);
        }
    const double diag_c = std::pow(N, (k - 1) * alpha);
    const double off_c = std::pow(N, (k - 1) * alpha - 0.5 * (1.0 - alpha));
    rep.rows.push_back({tag + "diag_max", diag_max, diag_c, diag_max / diag_c});
    rep.rows.push_back({tag + "offdiag_max", off_max, off_c, off_max / off_c});
    return rep;
}

DiagnosticsReport power_trace_bound_check(
    const HermitianMatrix& H, cplx z, int k,
    std::optional<cplx> expectation_proxy) {
    return power_trace_bound_check(eigensystem(H), z, k, expectation_proxy);
}

const char* product_kind_name(ProductKind kind) {
    switch (kind) {
        case ProductKind::G2Fbar: return "G2Fbar";
        case ProductKind::GFbar: return "GFbar";
        case ProductKind::GFt: return "GFt";
        case ProductKind::G2Ft: return "G2Ft";
        case ProductKind::G2F: return "G2F";
        case ProductKind::G2Fstar: return "G2Fstar";
    }
    return "?";
}

ProductKind product_kind_from_string(const std::string& s) {
    for (ProductKind k :
         {ProductKind::G2Fbar, ProductKind::GFbar, ProductKind::GFt,
          ProductKind::G2Ft, ProductKind::G2F, ProductKind::G2Fstar})
        if (s == product_kind_name(k)) return k;
    throw ParameterError("unknown product kind: " + s);
}

ResolventProducts::ResolventProducts(Eigensystem es) : es_(std::move(es)) {
    const int n = es_.n;
    if (n == 0) throw ParameterError("empty eigensystem");
    std::vector<cplx> s(size_t(n) * n);
    const cplx one = 1.0, zero = 0.0;
    cblas_zgemm(CblasColMajor, CblasTrans, CblasNoTrans, n, n, n, &one,
                es_.U.data(), n, es_.U.data(), n, &zero, s.data(), n);
    s_abs2_.resize(s.size());
    for (size_t i = 0; i < s.size(); ++i) s_abs2_[i] = std::norm(s[i]);
}

ProductTraceResult ResolventProducts::trace_vs_prediction(
    cplx z, cplx zprime, ProductKind which, double sigma) const {
    require_upper(z, "trace_vs_prediction");
    require_upper(zprime, "trace_vs_prediction (z')");
    if (sigma < -1.0 || sigma > 1.0)
        throw ParameterError("sigma must lie in [-1, 1]");
    const int n = es_.n;
    const double N = double(n);
    const double alpha = alpha_of(z, n);
    const double chi = chi_exponent(alpha);

    // weighted bilinear sum_{kl} a_k b_l |S_kl|^2, or plain sum_k a_k b_k
    auto weighted = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx acc = 0.0;
        for (int l = 0; l < n; ++l) {
            const double* w = s_abs2_.data() + size_t(l) * n;
            cplx inner = 0.0;
            for (int k = 0; k < n; ++k) inner += a[k] * w[k];
            acc += b[l] * inner;
        }
        return acc / N;
    };
    auto diagonal = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx acc = 0.0;
        for (int k = 0; k < n; ++k) acc += a[k] * b[k];
        return acc / N;
    };

    const std::vector<cplx> d1 = shifted_inverses(es_.lambda, z, 1);
    const std::vector<cplx> d2 = shifted_inverses(es_.lambda, z, 2);
    const std::vector<cplx> dp = shifted_inverses(es_.lambda, zprime, 1);
    const std::vector<cplx> c = shifted_inverses(es_.lambda, std::conj(zprime), 1);

    ProductTraceResult out;
    out.kind = which;
    const cplx mz = stieltjes_m(z);
    const cplx mzb = stieltjes_m(std::conj(zprime));
    const cplx dm = mz - mzb;
    const cplx nu = (z - std::conj(zprime)) + (1.0 - sigma) * dm;

    switch (which) {
        case ProductKind::G2Fbar:
            out.empirical = weighted(d2, c);
            out.predicted = -dm / (nu * nu);
            out.scale = std::pow(N, 2.0 * alpha - chi);
            break;
        case ProductKind::GFbar:
            out.empirical = weighted(d1, c);
            out.scale = std::pow(N, 2.0 * alpha - 1.0);
            out.centered_bound = true;
            break;
        case ProductKind::GFt:
            out.empirical = weighted(d1, dp);
            out.scale = std::pow(N, alpha - chi);
            break;
        case ProductKind::G2Ft:
            out.empirical = weighted(d2, dp);
            out.scale = std::pow(N, 2.0 * alpha - chi);
            break;
        case ProductKind::G2F:
            out.empirical = diagonal(d2, dp);
            out.scale = std::pow(N, 2.0 * alpha - chi);
            break;
        case ProductKind::G2Fstar: {
            out.empirical = diagonal(d2, c);
            const cplx dz = z - std::conj(zprime);
            out.predicted = -dm / (dz * dz);
            out.scale = std::pow(N, 2.0 * alpha - chi);
            break;
        }
    }
    return out;
}

ProductTraceResult product_trace_vs_prediction(const HermitianMatrix& H,
                                               cplx z, cplx zprime,
                                               ProductKind which,
                                               double sigma) {
    return ResolventProducts(eigensystem(H))
        .trace_vs_prediction(z, zprime, which, sigma);
}

} // namespace mesormt
