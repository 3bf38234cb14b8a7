#include "mesormt/cumulants.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "mesormt/errors.hpp"

namespace mesormt {

namespace {

// Pascal's triangle, grown on demand. Orders here stay below ~20, well
// inside exact double range.
double binom(int n, int k) {
    static std::vector<std::vector<double>> rows = {{1.0}};
    static std::mutex guard;
    std::lock_guard<std::mutex> lock(guard);
    while (static_cast<int>(rows.size()) <= n) {
        const auto& prev = rows.back();
        std::vector<double> row(prev.size() + 1, 1.0);
        for (size_t i = 1; i + 1 < row.size(); ++i)
            row[i] = prev[i - 1] + prev[i];
        rows.push_back(std::move(row));
    }
    return (k < 0 || k > n) ? 0.0 : rows[n][k];
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

cplx ipow(int n) {
    static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[n & 3];
}

std::vector<std::vector<cplx>> triangle(int order) {
    std::vector<std::vector<cplx>> t(order + 1);
    for (int p = 0; p <= order; ++p) t[p].assign(order - p + 1, cplx(0.0));
    return t;
}

// Gauss-Hermite rule for weight e^{-t^2} via the symmetric tridiagonal
// Jacobi matrix (offdiagonal sqrt(k/2)), eigenvalues = nodes, weights from
// the first eigenvector components scaled by sqrt(pi).
struct HermiteRule {
    std::vector<double> t;
    std::vector<double> w;
};

const HermiteRule& hermite_rule(int n) {
    static std::unordered_map<int, HermiteRule> cache;
    static std::mutex guard;
    std::lock_guard<std::mutex> lock(guard);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> d(n, 0.0), e(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(0.5 * k);
    std::vector<double> zmat(static_cast<size_t>(n) * n);
    lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, d.data(),
                                    e.data(), zmat.data(), n);
    if (info != 0)
        throw NumericalError("Gauss-Hermite node solve failed, info=" +
                             std::to_string(info));
    HermiteRule rule;
    rule.t = d;
    rule.w.resize(n);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        double v0 = zmat[static_cast<size_t>(i) * n];
        rule.w[i] = sqrt_pi * v0 * v0;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// Node count: exact for polynomial integrands up to degree 2n-1 per axis;
// 48 also leaves the non-polynomial test maps at the 1e-13 level.
constexpr int kHermiteNodes = 48;

bool is_exactly_real_table(const MomentTable& m) {
    for (int p = 0; p <= m.order; ++p)
        for (int q = 0; p + q <= m.order; ++q)
            if (m.at(p, q).imag() != 0.0) return false;
    // degenerate in p+q, bit for bit (law_moments builds real tables that
    // way; hand-built tables that merely round-trip near-real fall through
    // to the general recursion)
    for (int k = 0; k <= m.order; ++k)
        for (int p = 1; p <= k; ++p)
            if (m.at(p, k - p) != m.at(0, k)) return false;
    return true;
}

} // namespace

MomentTable::MomentTable(int order_) : order(order_), m(triangle(order_)) {
    if (order_ < 0) throw ParameterError("moment table order must be >= 0");
    m[0][0] = 1.0;
}

const cplx& MomentTable::at(int p, int q) const {
    if (p < 0 || q < 0 || p + q > order)
        throw ParameterError("moment index out of range");
    return m[p][q];
}

cplx& MomentTable::at(int p, int q) {
    if (p < 0 || q < 0 || p + q > order)
        throw ParameterError("moment index out of range");
    return m[p][q];
}

void MomentTable::validate(double tol) const {
    if (std::abs(at(0, 0) - 1.0) > tol)
        throw ParameterError("moment table must have m[0][0] = 1");
    for (int p = 0; p <= order; ++p)
        for (int q = p; p + q <= order; ++q)
            if (std::abs(at(q, p) - std::conj(at(p, q))) > tol)
                throw ParameterError(
                    "moment table breaks conjugate mirror symmetry");
}

CumulantTable::CumulantTable(int order_) : order(order_), c(triangle(order_)) {
    if (order_ < 0) throw ParameterError("cumulant table order must be >= 0");
}

const cplx& CumulantTable::at(int p, int q) const {
    if (p < 0 || q < 0 || p + q > order)
        throw ParameterError("cumulant index out of range");
    return c[p][q];
}

cplx& CumulantTable::at(int p, int q) {
    if (p < 0 || q < 0 || p + q > order)
        throw ParameterError("cumulant index out of range");
    return c[p][q];
}

// Partition recursion with a distinguished h factor: for p >= 1,
//   m[p][q] = sum_{i<=p-1, j<=q} binom(p-1,i) binom(q,j) c[i+1][j] m[p-1-i][q-j].
// Solving for the (i,j) = (p-1,q) term inverts it. Entries with p < q come
// from the conjugate mirror, so the p >= 1 form covers everything.
CumulantTable moments_to_cumulants(const MomentTable& mt) {
    mt.validate();
    CumulantTable ct(mt.order);

    if (is_exactly_real_table(mt)) {
        // univariate recursion on mu_k = m[k][0]; writing c[p][q] = kappa_{p+q}
        // makes the real-variable degeneracy exact, which the imaginary-part
        // expansion weights rely on
        std::vector<cplx> kappa(mt.order + 1, cplx(0.0));
        for (int k = 1; k <= mt.order; ++k) {
            cplx acc = mt.at(k, 0);
            for (int j = 0; j <= k - 2; ++j)
                acc -= binom(k - 1, j) * kappa[j + 1] * mt.at(k - 1 - j, 0);
            kappa[k] = acc;
        }
        for (int p = 0; p <= mt.order; ++p)
            for (int q = 0; p + q <= mt.order; ++q)
                if (p + q >= 1) ct.at(p, q) = kappa[p + q];
        return ct;
    }

    for (int k = 1; k <= mt.order; ++k) {
        for (int p = k; 2 * p >= k; --p) {
            int q = k - p;
            cplx acc = mt.at(p, q);
            for (int i = 0; i <= p - 1; ++i)
                for (int j = 0; j <= q; ++j) {
                    if (i == p - 1 && j == q) continue;
                    acc -= binom(p - 1, i) * binom(q, j) * ct.at(i + 1, j) *
                           mt.at(p - 1 - i, q - j);
                }
            ct.at(p, q) = acc;
            ct.at(q, p) = std::conj(acc);
        }
    }
    return ct;
}

MomentTable cumulants_to_moments(const CumulantTable& ct) {
    MomentTable mt(ct.order);
    for (int k = 1; k <= ct.order; ++k) {
        // pure-hbar column first (partitions contain only hbar blocks)
        cplx col = 0.0;
        for (int j = 0; j <= k - 1; ++j)
            col += binom(k - 1, j) * ct.at(0, j + 1) * mt.at(0, k - 1 - j);
        mt.at(0, k) = col;
        for (int p = 1; p <= k; ++p) {
            int q = k - p;
            cplx acc = 0.0;
            for (int i = 0; i <= p - 1; ++i)
                for (int j = 0; j <= q; ++j)
                    acc += binom(p - 1, i) * binom(q, j) * ct.at(i + 1, j) *
                           mt.at(p - 1 - i, q - j);
            mt.at(p, q) = acc;
        }
    }
    return mt;
}

void DiscreteLaw::validate() const {
    if (atoms.empty()) throw ParameterError("discrete law needs atoms");
    double total = 0.0;
    for (const auto& [value, prob] : atoms) {
        (void)value;
        if (prob < 0.0) throw ParameterError("negative atom probability");
        total += prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ParameterError("atom probabilities must sum to 1");
}

void GaussianLaw::validate() const {
    if (var_x < 0.0 || var_y < 0.0)
        throw ParameterError("Gaussian law variances must be >= 0");
}

cplx law_expectation(const EntryLawSpec& law,
                     const std::function<cplx(double, double)>& g) {
    if (const auto* d = std::get_if<DiscreteLaw>(&law)) {
        d->validate();
        cplx acc = 0.0;
        for (const auto& [value, prob] : d->atoms)
            acc += prob * g(value.real(), value.imag());
        return acc;
    }
    const auto& gl = std::get<GaussianLaw>(law);
    gl.validate();
    const auto& rule = hermite_rule(kHermiteNodes);
    const double sx = std::sqrt(2.0 * gl.var_x);
    const double sy = std::sqrt(2.0 * gl.var_y);
    const double inv_pi = 1.0 / M_PI;
    if (gl.var_y == 0.0 || gl.var_x == 0.0) {
        // degenerate axis: single 1D rule
        cplx acc = 0.0;
        for (size_t i = 0; i < rule.t.size(); ++i) {
            double u = rule.t[i];
            acc += rule.w[i] * (gl.var_y == 0.0 ? g(sx * u, 0.0)
                                                : g(0.0, sy * u));
        }
        return acc / std::sqrt(M_PI);
    }
    cplx acc = 0.0;
    for (size_t i = 0; i < rule.t.size(); ++i) {
        cplx inner = 0.0;
        for (size_t j = 0; j < rule.t.size(); ++j)
            inner += rule.w[j] * g(sx * rule.t[i], sy * rule.t[j]);
        acc += rule.w[i] * inner;
    }
    return acc * inv_pi;
}

MomentTable law_moments(const EntryLawSpec& law, int order) {
    MomentTable mt(order);
    bool real_law = false;
    if (const auto* d = std::get_if<DiscreteLaw>(&law)) {
        real_law = true;
        for (const auto& [value, prob] : d->atoms) {
            (void)prob;
            if (value.imag() != 0.0) real_law = false;
        }
    } else {
        real_law = std::get<GaussianLaw>(law).var_y == 0.0;
    }

    if (real_law) {
        // build from univariate powers so the p+q degeneracy is bit-exact
        for (int k = 1; k <= order; ++k) {
            const int kk = k;
            cplx mu = law_expectation(law, [kk](double x, double) {
                double r = 1.0;
                for (int i = 0; i < kk; ++i) r *= x;
                return cplx(r, 0.0);
            });
            for (int p = 0; p <= k; ++p) mt.at(p, k - p) = mu;
        }
        return mt;
    }

    for (int p = 0; p <= order; ++p)
        for (int q = 0; p + q <= order; ++q) {
            if (p == 0 && q == 0) continue;
            if (q < p) {
                mt.at(p, q) = std::conj(mt.at(q, p));
                continue;
            }
            mt.at(p, q) = law_expectation(law, [p, q](double x, double y) {
                cplx h(x, y), hb(x, -y), r = 1.0;
                for (int i = 0; i < p; ++i) r *= h;
                for (int i = 0; i < q; ++i) r *= hb;
                return r;
            });
        }
    return mt;
}

cplx WirtingerFunction::mixed_xy(int a, int b, double x, double y) const {
    if (a < 0 || b < 0 || a + b > max_order)
        throw ParameterError("partial derivative order beyond declared max");
    if (partial_xy) return partial_xy(a, b, x, y);
    if (a == 0 && b == 0) return eval(x, y);
    // composed central differences: offsets (a/2 - k) h, O(h^2) truncation
    const double h = fd_step;
    cplx acc = 0.0;
    for (int k = 0; k <= a; ++k)
        for (int l = 0; l <= b; ++l) {
            double sign = ((k + l) % 2 == 0) ? 1.0 : -1.0;
            acc += sign * binom(a, k) * binom(b, l) *
                   eval(x + (0.5 * a - k) * h, y + (0.5 * b - l) * h);
        }
    return acc / std::pow(h, a + b);
}

cplx WirtingerFunction::wirtinger(int p, int q, double x, double y) const {
    // d_z = (d_x - i d_y)/2, d_zbar = (d_x + i d_y)/2, expanded binomially
    cplx acc = 0.0;
    for (int a = 0; a <= p; ++a)
        for (int b = 0; b <= q; ++b) {
            cplx phase = ipow((3 * (p - a) + (q - b)) & 3); // (-i)^{p-a} i^{q-b}
            acc += binom(p, a) * binom(q, b) * phase *
                   mixed_xy(a + b, (p - a) + (q - b), x, y);
        }
    return acc / std::pow(2.0, p + q);
}

WirtingerFunction z_polynomial(std::vector<std::vector<cplx>> coeff) {
    using Poly = std::vector<std::vector<cplx>>;
    auto d_z = [](const Poly& c) {
        Poly r(c.size() > 1 ? c.size() - 1 : 1);
        for (auto& row : r) row.assign(c.empty() ? 1 : c[0].size(), cplx(0.0));
        for (size_t p = 1; p < c.size(); ++p)
            for (size_t q = 0; q < c[p].size(); ++q)
                r[p - 1][q] += double(p) * c[p][q];
        return r;
    };
    auto d_zb = [](const Poly& c) {
        Poly r(c.size());
        size_t cols = c.empty() ? 1 : c[0].size();
        for (auto& row : r) row.assign(cols > 1 ? cols - 1 : 1, cplx(0.0));
        for (size_t p = 0; p < c.size(); ++p)
            for (size_t q = 1; q < c[p].size(); ++q)
                r[p][q - 1] += double(q) * c[p][q];
        return r;
    };
    auto scale = [](Poly c, cplx s) {
        for (auto& row : c)
            for (auto& v : row) v *= s;
        return c;
    };
    auto add = [](const Poly& a, const Poly& b) {
        Poly r(std::max(a.size(), b.size()));
        size_t cols = std::max(a.empty() ? 0 : a[0].size(),
                               b.empty() ? 0 : b[0].size());
        for (auto& row : r) row.assign(cols, cplx(0.0));
        for (size_t p = 0; p < a.size(); ++p)
            for (size_t q = 0; q < a[p].size(); ++q) r[p][q] += a[p][q];
        for (size_t p = 0; p < b.size(); ++p)
            for (size_t q = 0; q < b[p].size(); ++q) r[p][q] += b[p][q];
        return r;
    };
    auto eval_poly = [](const Poly& c, double x, double y) {
        cplx z(x, y), zb(x, -y), acc = 0.0;
        for (size_t p = 0; p < c.size(); ++p) {
            cplx zp = 1.0;
            for (size_t i = 0; i < p; ++i) zp *= z;
            cplx zq = 1.0;
            for (size_t q = 0; q < c[p].size(); ++q) {
                acc += c[p][q] * zp * zq;
                zq *= zb;
            }
        }
        return acc;
    };

    // normalize to rectangular storage
    size_t cols = 1;
    for (const auto& row : coeff) cols = std::max(cols, row.size());
    for (auto& row : coeff) row.resize(cols, cplx(0.0));
    if (coeff.empty()) coeff.push_back(std::vector<cplx>(1, cplx(0.0)));

    WirtingerFunction f;
    f.max_order = 24;
    f.eval = [coeff, eval_poly](double x, double y) {
        return eval_poly(coeff, x, y);
    };
    f.partial_xy = [coeff, d_z, d_zb, scale, add, eval_poly](
                       int a, int b, double x, double y) {
        Poly cur = coeff;
        for (int i = 0; i < a; ++i) cur = add(d_z(cur), d_zb(cur));
        for (int i = 0; i < b; ++i)
            cur = add(scale(d_z(cur), cplx(0, 1)), scale(d_zb(cur), cplx(0, -1)));
        return eval_poly(cur, x, y);
    };
    return f;
}

ExpansionCheckResult expansion_check(const WirtingerFunction& f,
                                     const EntryLawSpec& law, int ell,
                                     ExpansionMode mode) {
    if (ell < 0) throw ParameterError("expansion order must be >= 0");
    if (f.max_order < ell)
        throw ParameterError("test map lacks derivatives up to order " +
                             std::to_string(ell));

    MomentTable mt = law_moments(law, ell + 1);
    CumulantTable ct = moments_to_cumulants(mt);

    ExpansionCheckResult out;
    out.lhs = law_expectation(law, [&f, mode](double x, double y) {
        cplx h(x, y);
        cplx factor = (mode == ExpansionMode::standard) ? h : h - std::conj(h);
        return f.eval(x, y) * factor;
    });

    out.order_terms.assign(ell + 1, cplx(0.0));
    for (int k = 0; k <= ell; ++k) {
        cplx term = 0.0;
        for (int p = 0; p <= k; ++p) {
            int q = k - p;
            cplx weight = (mode == ExpansionMode::standard)
                              ? ct.at(p + 1, q)
                              : ct.at(p + 1, q) - ct.at(p, q + 1);
            weight /= factorial(p) * factorial(q);
            if (weight == cplx(0.0)) continue;
            cplx ed = law_expectation(law, [&f, p, q](double x, double y) {
                return f.wirtinger(p, q, x, y);
            });
            term += weight * ed;
        }
        out.order_terms[k] = term;
        out.rhs += term;
    }
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

EntryCumulantPrediction entry_cumulant_predictions(double sigma, int N) {
    if (sigma < -1.0 || sigma > 1.0)
        throw ParameterError("sigma must lie in [-1, 1]");
    if (N < 1) throw ParameterError("N must be >= 1");
    EntryCumulantPrediction p;
    p.c20_minus_c11 = (sigma - 1.0) / N;
    p.c11_minus_c02 = (1.0 - sigma) / N;
    p.e_b2 = (1.0 - sigma) / (2.0 * N);
    p.third_order_bound = std::sqrt(1.0 - sigma) * std::pow(N, -1.5);
    return p;
}

} // namespace mesormt
