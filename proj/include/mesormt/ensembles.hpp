#pragma once
// Hermitian random-matrix ensembles with tunable symmetry parameter.
//
// An N x N Wigner matrix here has independent upper-triangular entries with
//   E |sqrt(N) H_ij|^2 = 1,   E (sqrt(N) H_ij)^2 = sigma in [-1, 1],
// realized as H_ij = a + ib with independent real a, b,
//   Var a = (1+sigma)/(2N),   Var b = (1-sigma)/(2N),
// and a real diagonal with E (sqrt(N) H_ii)^2 = zeta (default 1+sigma).
// sigma=+1 with zeta=2 is the Gaussian orthogonal ensemble convention,
// sigma=0 with zeta=1 the unitary one.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "vendor_json_fwd.hpp"

namespace mesormt {

using cplx = std::complex<double>;

enum class EntryLaw { gaussian, rademacher_mix, uniform };

std::string to_string(EntryLaw law);
EntryLaw entry_law_from_string(const std::string& s);

struct EnsembleSpec {
    int N = 0;
    double sigma = 0.0;
    EntryLaw entry_law = EntryLaw::gaussian;
    double diag_second_moment = -1.0; // zeta; negative means "default to 1+sigma"
    uint64_t master_seed = 0;

    double zeta() const { return diag_second_moment < 0.0 ? 1.0 + sigma : diag_second_moment; }
    void validate() const; // throws ParameterError on bad fields
};

// Upper bound accepted for the diagonal second moment.
inline constexpr double kMaxDiagSecondMoment = 100.0;

struct HermitianMatrix {
    int n = 0;
    std::vector<cplx> a; // row-major, both triangles stored, a[i*n + j] = H_ij

    cplx operator()(int i, int j) const { return a[size_t(i) * n + j]; }
    cplx& at(int i, int j) { return a[size_t(i) * n + j]; }

    bool is_exactly_real() const;
    // max_ij |H_ij - conj(H_ji)|; 0 for matrices built by the samplers
    double hermiticity_defect() const;
};

HermitianMatrix sample_wigner(const EnsembleSpec& spec, uint64_t stream_index);

// beta=1: real symmetric (sigma=1, zeta=2); beta=2: complex (sigma=0, zeta=1).
HermitianMatrix sample_gaussian_ensemble(int N, int beta, uint64_t stream_index,
                                         uint64_t master_seed = 0);

// Matrix Ornstein-Uhlenbeck interpolation
//   H_t = sqrt(e^{-t}) H0 + sqrt(1 - e^{-t}) V,
// V an independent Gaussian ensemble of the given beta. t=0 returns H0
// exactly, t=inf the pure Gaussian ensemble.
HermitianMatrix dbm_matrix(const HermitianMatrix& H0, double t, int beta,
                           uint64_t stream_index, uint64_t master_seed = 0);

// Empirical entry moments pooled over off-diagonal entries of `samples`
// freshly sampled matrices. Standard errors treat pooled entries as iid
// (true by construction: distinct (sample, i, j) never share draws).
struct EntryMomentReport {
    int64_t entry_count = 0;
    double e_abs2 = 0.0, se_abs2 = 0.0;       // E |sqrt(N) h|^2
    cplx e_sq;                                 // E (sqrt(N) h)^2
    double se_sq = 0.0;                        // SE of each real component
    std::vector<double> e_abs_p;               // E |sqrt(N) h|^p, p = 1..8
    std::vector<double> se_abs_p;
};

EntryMomentReport entry_moment_report(const EnsembleSpec& spec, int samples);

// Same pooled table for the interpolated matrix H_t built from fresh
// h0_spec draws. Checks E (sqrt(N) (H_t)_ij)^2 = e^{-t} sigma for beta=2.
EntryMomentReport dbm_entry_moment_report(const EnsembleSpec& h0_spec, double t,
                                          int beta, int samples);

// Raw little-endian binary dump: doubles (re, im) over the upper triangle,
// rows i = 0..n-1, columns j = i..n-1.
void dump_matrix(const HermitianMatrix& H, const std::string& path);

void to_json(nlohmann::json& j, const EnsembleSpec& spec);
void from_json(const nlohmann::json& j, EnsembleSpec& spec);

} // namespace mesormt
