#include "mesormt/linear_stats.hpp"

#include <cmath>
#include <lapacke.h>

#include "mesormt/errors.hpp"
#include "mesormt/quadrature.hpp"

namespace mesormt {

namespace {

void check_hermitian(const HermitianMatrix& H) {
    if (H.n < 1 || H.a.size() != size_t(H.n) * H.n)
        throw ParameterError("eigensolver: malformed matrix");
    if (H.hermiticity_defect() > kHermitianTol)
        throw ParameterError("eigensolver: input is not Hermitian within 1e-12");
}

bool outside_bulk(const std::vector<double>& lam) {
    constexpr double delta = 0.5;
    return !lam.empty() && (lam.front() < -2.0 - delta || lam.back() > 2.0 + delta);
}

} // namespace

SpectrumSample eigenvalues(const HermitianMatrix& H) {
    check_hermitian(H);
    const int n = H.n;
    SpectrumSample s;
    s.lambda.assign(n, 0.0);
    lapack_int info = 0;
    if (H.is_exactly_real()) {
        std::vector<double> a(size_t(n) * n);
        for (size_t k = 0; k < a.size(); ++k) a[k] = H.a[k].real();
        info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n,
                              s.lambda.data());
    } else {
        // a row-major Hermitian buffer read column-major is the entrywise
        // conjugate; spectra agree, so no transpose is needed values-only
        std::vector<cplx> a = H.a;
        info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                              reinterpret_cast<lapack_complex_double*>(a.data()),
                              n, s.lambda.data());
    }
    if (info != 0)
        throw NumericalError("eigensolver: convergence failure, info=" + std::to_string(info));
    double norm = std::max(std::abs(s.lambda.front()), std::abs(s.lambda.back()));
    s.residual_bound = 1e-13 * std::max(1.0, norm) * n; // backward-stability scale
    s.outside_bulk_warning = outside_bulk(s.lambda);
    return s;
}

Eigensystem eigensystem(const HermitianMatrix& H) {
    check_hermitian(H);
    const int n = H.n;
    Eigensystem es;
    es.n = n;
    es.lambda.assign(n, 0.0);
    es.U.assign(size_t(n) * n, cplx(0.0, 0.0));
    lapack_int info = 0;
    if (H.is_exactly_real()) {
        std::vector<double> a(size_t(n) * n);
        for (size_t k = 0; k < a.size(); ++k) a[k] = H.a[k].real();
        info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                              es.lambda.data());
        for (size_t k = 0; k < a.size(); ++k) es.U[k] = cplx(a[k], 0.0);
    } else {
        // column-major view of the buffer is conj(H); its eigenvectors are
        // the conjugates of ours, so conjugate the output back
        std::vector<cplx> a = H.a;
        info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                              reinterpret_cast<lapack_complex_double*>(a.data()),
                              n, es.lambda.data());
        for (size_t k = 0; k < a.size(); ++k) es.U[k] = std::conj(a[k]);
    }
    if (info != 0)
        throw NumericalError("eigensolver: convergence failure, info=" + std::to_string(info));
    return es;
}

double linear_statistic(const SpectrumSample& spectrum, const TestFunction& f,
                        const MesoWindow& w) {
    w.validate();
    if (int(spectrum.lambda.size()) != w.N)
        throw ParameterError("linear_statistic: window N does not match spectrum length");
    std::vector<double> terms(spectrum.lambda.size());
    for (size_t i = 0; i < spectrum.lambda.size(); ++i)
        terms[i] = f.eval((spectrum.lambda[i] - w.E) / w.eta);
    return pairwise_sum(terms) - compensator(f, w);
}

} // namespace mesormt
