#pragma once
// Dense Hermitian eigensolver wrapper and the centered linear statistic
//   Z(f) = sum_i f((lambda_i - E)/eta) - N Int rho(x) f((x - E)/eta) dx.

#include <optional>
#include <vector>

#include "mesormt/ensembles.hpp"
#include "mesormt/spectral.hpp"

namespace mesormt {

struct SpectrumSample {
    std::vector<double> lambda; // ascending
    // backward-error bound reported by the solver path when available
    std::optional<double> residual_bound;
    // soft sanity flag: eigenvalues escaping [-2-delta, 2+delta], delta=0.5
    bool outside_bulk_warning = false;
};

// Eigenvalues only. Exactly-real matrices take the real-symmetric fast path.
// Throws NumericalError if the backend fails to converge.
SpectrumSample eigenvalues(const HermitianMatrix& H);

// Full decomposition H = U diag(lambda) U^*, U column-major with eigenvector
// k in column k.
struct Eigensystem {
    int n = 0;
    std::vector<double> lambda;
    std::vector<cplx> U;

    cplx u(int i, int k) const { return U[size_t(k) * n + i]; }
};

Eigensystem eigensystem(const HermitianMatrix& H);

// Validation tolerance for Hermitian input.
inline constexpr double kHermitianTol = 1e-12;

double linear_statistic(const SpectrumSample& spectrum, const TestFunction& f,
                        const MesoWindow& w);

} // namespace mesormt
