#include "mesormt/ensembles.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mesormt/errors.hpp"
#include "mesormt/quadrature.hpp"
#include "mesormt/rng.hpp"
#include "json.hpp"

namespace mesormt {

std::string to_string(EntryLaw law) {
    switch (law) {
        case EntryLaw::gaussian: return "gaussian";
        case EntryLaw::rademacher_mix: return "rademacher_mix";
        case EntryLaw::uniform: return "uniform";
    }
    return "?";
}

EntryLaw entry_law_from_string(const std::string& s) {
    if (s == "gaussian") return EntryLaw::gaussian;
    if (s == "rademacher_mix") return EntryLaw::rademacher_mix;
    if (s == "uniform") return EntryLaw::uniform;
    throw ParameterError("unknown entry law: " + s);
}

void EnsembleSpec::validate() const {
    if (N < 1) throw ParameterError("ensemble: N must be >= 1");
    if (!(sigma >= -1.0 && sigma <= 1.0))
        throw ParameterError("ensemble: sigma must lie in [-1, 1]");
    const double z = zeta();
    if (!(z >= 0.0) || z > kMaxDiagSecondMoment)
        throw ParameterError("ensemble: diagonal second moment out of range");
}

bool HermitianMatrix::is_exactly_real() const {
    for (const cplx& v : a)
        if (v.imag() != 0.0) return false;
    return true;
}

double HermitianMatrix::hermiticity_defect() const {
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return d;
}

namespace {

// One (a, b) pair for an off-diagonal entry; b scale 0 at sigma=+1 makes the
// matrix exactly real, a scale 0 at sigma=-1 exactly imaginary. The draws do
// not depend on sigma, only the scales do, so sweeps over sigma at a fixed
// seed are coupled through common random numbers.
struct EntryScales {
    double sa, sb, sd;
};

EntryScales scales_for(const EnsembleSpec& s) {
    const double N = s.N;
    return {std::sqrt((1.0 + s.sigma) / (2.0 * N)),
            std::sqrt((1.0 - s.sigma) / (2.0 * N)),
            std::sqrt(s.zeta() / N)};
}

// Two centered unit-variance real draws for one entry.
std::pair<double, double> unit_pair(EntryLaw law, CounterRng& rng) {
    switch (law) {
        case EntryLaw::gaussian:
            return rng.next_normal_pair();
        case EntryLaw::rademacher_mix: {
            const double u0 = rng.next_uniform(), u1 = rng.next_uniform();
            return {u0 < 0.5 ? -1.0 : 1.0, u1 < 0.5 ? -1.0 : 1.0};
        }
        case EntryLaw::uniform: {
            constexpr double r3 = 1.7320508075688772; // sqrt(3)
            const double u0 = rng.next_uniform(), u1 = rng.next_uniform();
            return {(2.0 * u0 - 1.0) * r3, (2.0 * u1 - 1.0) * r3};
        }
    }
    return {0.0, 0.0};
}

} // namespace

HermitianMatrix sample_wigner(const EnsembleSpec& spec, uint64_t stream_index) {
    spec.validate();
    const int n = spec.N;
    const EntryScales sc = scales_for(spec);
    HermitianMatrix H;
    H.n = n;
    H.a.assign(size_t(n) * n, cplx(0.0, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            CounterRng rng(derive_key(spec.master_seed, stream_index, i, j));
            const auto [z0, z1] = unit_pair(spec.entry_law, rng);
            if (i == j) {
                H.at(i, i) = cplx(sc.sd * z0, 0.0);
            } else {
                const cplx v(sc.sa * z0, sc.sb * z1);
                H.at(i, j) = v;
                H.at(j, i) = std::conj(v);
            }
        }
    }
    return H;
}

HermitianMatrix sample_gaussian_ensemble(int N, int beta, uint64_t stream_index,
                                         uint64_t master_seed) {
    if (beta != 1 && beta != 2) throw ParameterError("gaussian ensemble: beta must be 1 or 2");
    EnsembleSpec spec;
    spec.N = N;
    spec.sigma = (beta == 1) ? 1.0 : 0.0;
    spec.entry_law = EntryLaw::gaussian;
    spec.diag_second_moment = 1.0 + spec.sigma;
    spec.master_seed = master_seed;
    return sample_wigner(spec, stream_index);
}

HermitianMatrix dbm_matrix(const HermitianMatrix& H0, double t, int beta,
                           uint64_t stream_index, uint64_t master_seed) {
    if (!(t >= 0.0)) throw ParameterError("dbm: time must be >= 0");
    if (beta != 1 && beta != 2) throw ParameterError("dbm: beta must be 1 or 2");
    if (t == 0.0) return H0;
    // independent noise seed so H0 and V never share entry keys
    const uint64_t vseed = mix64(master_seed ^ 0xD1B54A32D192ED03ULL);
    HermitianMatrix V = sample_gaussian_ensemble(H0.n, beta, stream_index, vseed);
    if (std::isinf(t)) return V;
    const double c0 = std::sqrt(std::exp(-t));
    const double c1 = std::sqrt(1.0 - std::exp(-t));
    HermitianMatrix H = H0;
    for (size_t k = 0; k < H.a.size(); ++k) H.a[k] = c0 * H0.a[k] + c1 * V.a[k];
    return H;
}

namespace {

template <typename Draw>
EntryMomentReport pooled_entry_moments(int n, int samples, Draw&& draw) {
    if (samples < 2) throw ParameterError("entry_moment_report: need at least 2 samples");
    if (n < 2) throw ParameterError("entry_moment_report: need N >= 2 for off-diagonal entries");
    const double rtN = std::sqrt(double(n));

    // accumulate sums and sums of squares for SEs
    const int P = 8;
    double s_abs2 = 0, s_abs2_sq = 0;
    double s_re = 0, s_re_sq = 0, s_im = 0, s_im_sq = 0;
    std::vector<double> s_p(P, 0.0), s_p_sq(P, 0.0);
    int64_t cnt = 0;

    for (int s = 0; s < samples; ++s) {
        HermitianMatrix H = draw(uint64_t(s));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const cplx h = rtN * H(i, j);
                const double a2 = std::norm(h);
                const cplx h2 = h * h;
                s_abs2 += a2;
                s_abs2_sq += a2 * a2;
                s_re += h2.real();
                s_re_sq += h2.real() * h2.real();
                s_im += h2.imag();
                s_im_sq += h2.imag() * h2.imag();
                const double ab = std::abs(h);
                double pw = 1.0;
                for (int p = 0; p < P; ++p) {
                    pw *= ab;
                    s_p[p] += pw;
                    s_p_sq[p] += pw * pw;
                }
                ++cnt;
            }
        }
    }

    auto mean_se = [cnt](double s1, double s2) {
        const double m = s1 / cnt;
        const double var = std::max(0.0, s2 / cnt - m * m);
        return std::pair<double, double>(m, std::sqrt(var / cnt));
    };

    EntryMomentReport r;
    r.entry_count = cnt;
    std::tie(r.e_abs2, r.se_abs2) = mean_se(s_abs2, s_abs2_sq);
    auto [mre, sre] = mean_se(s_re, s_re_sq);
    auto [mim, sim] = mean_se(s_im, s_im_sq);
    r.e_sq = cplx(mre, mim);
    r.se_sq = std::max(sre, sim);
    r.e_abs_p.resize(P);
    r.se_abs_p.resize(P);
    for (int p = 0; p < P; ++p)
        std::tie(r.e_abs_p[p], r.se_abs_p[p]) = mean_se(s_p[p], s_p_sq[p]);
    return r;
}

} // namespace

EntryMomentReport entry_moment_report(const EnsembleSpec& spec, int samples) {
    spec.validate();
    return pooled_entry_moments(spec.N, samples, [&spec](uint64_t s) {
        return sample_wigner(spec, s);
    });
}

EntryMomentReport dbm_entry_moment_report(const EnsembleSpec& h0_spec, double t,
                                          int beta, int samples) {
    h0_spec.validate();
    return pooled_entry_moments(h0_spec.N, samples, [&](uint64_t s) {
        return dbm_matrix(sample_wigner(h0_spec, s), t, beta, s,
                          h0_spec.master_seed);
    });
}

void dump_matrix(const HermitianMatrix& H, const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ParameterError("dump_matrix: cannot open " + path);
    auto put = [f](double x) {
        uint64_t u = std::bit_cast<uint64_t>(x);
        if constexpr (std::endian::native == std::endian::big) {
            u = __builtin_bswap64(u);
        }
        std::fwrite(&u, sizeof(u), 1, f);
    };
    for (int i = 0; i < H.n; ++i) {
        for (int j = i; j < H.n; ++j) {
            const cplx v = H(i, j);
            put(v.real());
            put(v.imag());
        }
    }
    std::fclose(f);
}

void to_json(nlohmann::json& j, const EnsembleSpec& spec) {
    j = nlohmann::json{{"N", spec.N},
                       {"sigma", spec.sigma},
                       {"entry_law", to_string(spec.entry_law)},
                       {"diag_second_moment", spec.zeta()},
                       {"master_seed", spec.master_seed}};
}

void from_json(const nlohmann::json& j, EnsembleSpec& spec) {
    spec.N = j.at("N").get<int>();
    spec.sigma = j.at("sigma").get<double>();
    spec.entry_law = entry_law_from_string(j.value("entry_law", std::string("gaussian")));
    spec.diag_second_moment = j.value("diag_second_moment", -1.0);
    spec.master_seed = j.value("master_seed", uint64_t(0));
    spec.validate();
}

} // namespace mesormt
