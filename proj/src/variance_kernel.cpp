#include "mesormt/variance_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "mesormt/errors.hpp"
#include "mesormt/quadrature.hpp"

namespace mesormt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kOrder = 16;   // Gauss-Legendre order per panel
constexpr double kU0 = 32.0; // near/far split in u = x - y

// ------------------------- kernels in u = x - y -------------------------
// Each kernel knows its exact tail integral Int_R^inf k(u) du, used to close
// the u-domain analytically past the cutoff.
struct Kernel1D {
    std::function<double(double)> eval;
    std::function<double(double)> tail;
};

Kernel1D interp_kernel(double mu) {
    if (std::isinf(mu))
        return {[](double u) { return 1.0 / (u * u); },
                [](double R) { return 1.0 / R; }};
    const double m2 = mu * mu;
    return {[m2](double u) {
                const double u2 = u * u, d = u2 + m2;
                return 1.0 / u2 + (u2 - m2) / (d * d);
            },
            [m2](double R) { return 1.0 / R + R / (R * R + m2); }};
}

Kernel1D alt_kernel(double mu) {
    if (std::isinf(mu))
        return {[](double u) { return 1.0 / (u * u); },
                [](double R) { return 1.0 / R; }};
    const double m2 = mu * mu;
    return {[m2](double u) {
                const double u2 = u * u, d = u2 + m2;
                return 2.0 * u2 / (d * d) + m2 / (u2 * d);
            },
            [m2, mu](double R) {
                // Int 2u^2/(u^2+m^2)^2 = atan(mu/R)/mu + R/(R^2+mu^2),
                // Int m^2/(u^2(u^2+m^2)) = 1/R - atan(mu/R)/mu
                return 1.0 / R + R / (R * R + m2);
            }};
}

Kernel1D comparison_kernel(double mu) {
    if (std::isinf(mu))
        return {[](double u) { return 1.0 / (u * u); },
                [](double R) { return 1.0 / R; }};
    if (mu == 0.0)
        return {[](double) { return 0.0; }, [](double) { return 0.0; }};
    const double m2 = mu * mu;
    return {[m2](double u) {
                const double u2 = u * u;
                return m2 / (u2 * (u2 + m2));
            },
            [m2, mu](double R) { return 1.0 / R - std::atan(mu / R) / mu; }};
}

// ----------------------- decay/radius policy ----------------------------
struct FnGeometry {
    double point_radius; // |f|,|f'| below 1e-16 beyond this (inf if slow)
    bool slow;           // polynomial decay, needs explicit tail bounds
};

FnGeometry geometry_of(const TestFunction& f) {
    if (!std::isinf(f.support_radius)) return {f.support_radius, false};
    for (double R = 1.0; R <= 64.0; R *= 2.0) {
        double worst = 0.0;
        for (int k = 0; k <= 20; ++k) {
            const double x = R * (1.0 + k / 20.0);
            worst = std::max(worst, std::abs(f.eval(x)) + std::abs(f.deriv(1, x)));
            worst = std::max(worst, std::abs(f.eval(-x)) + std::abs(f.deriv(1, -x)));
        }
        if (worst < 1e-16) return {R, false};
    }
    return {kInf, true};
}

// 1D integral of `fn` over explicit panel edges, order-`ord` GL per panel
double integrate_edges(const std::function<double(double)>& fn,
                       const std::vector<double>& edges, int ord) {
    std::vector<double> xs, ws, terms;
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        gl_nodes_on(edges[p], edges[p + 1], ord, xs, ws);
        for (size_t k = 0; k < xs.size(); ++k) terms.push_back(ws[k] * fn(xs[k]));
    }
    return pairwise_sum(terms);
}

std::vector<double> mirrored(const std::vector<double>& half) {
    std::vector<double> e;
    for (size_t k = half.size(); k-- > 1;) e.push_back(-half[k]);
    e.insert(e.end(), half.begin(), half.end());
    return e;
}

// Panel edges for Int f(t) g(t - shift) dt: geometric grids around both
// feature centers (0 and shift), merged.
std::vector<double> correlation_edges(double shift, double T) {
    std::vector<double> e = mirrored(geometric_edges(0.5, T));
    for (double v : mirrored(geometric_edges(0.5, T))) {
        const double t = v + shift;
        if (t > -T && t < T) e.push_back(t);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-9; }),
            e.end());
    return e;
}

struct PairGeometry {
    double Ru;      // u cutoff (beyond: analytic kernel tail on 4*I_fg)
    double Rv;      // v cutoff of the near region
    double Tc;      // t cutoff of the 1D correlation integrals
    double wv;      // near-region v panel width
    bool slow;      // some function decays only polynomially
    double s_min;   // min decay exponent (for tail bounds)
};

PairGeometry pair_geometry(const TestFunction& f, const TestFunction& g,
                           double override_R) {
    const FnGeometry gf = geometry_of(f), gg = geometry_of(g);
    PairGeometry pg;
    pg.slow = gf.slow || gg.slow;
    pg.s_min = std::min(f.decay_exponent, g.decay_exponent);
    const double S = std::min(std::isinf(gf.point_radius) ? 64.0 : gf.point_radius,
                              std::isinf(gg.point_radius) ? 64.0 : gg.point_radius);
    if (pg.slow) {
        // documented bounds for s >= 1 (builtin poisson): far-u remainder
        // ~ R^-(2+s), near-v tail ~ Rv^-(2s+3), correlation tail ~ Tc^-(1+s)
        pg.Ru = 16384.0;
        pg.Rv = 600.0;
        pg.Tc = 32768.0;
    } else {
        const double Smax =
            std::max(std::isinf(gf.point_radius) ? 8.0 : gf.point_radius,
                     std::isinf(gg.point_radius) ? 8.0 : gg.point_radius);
        pg.Ru = 1024.0;
        pg.Rv = kU0 + 2.0 * Smax + 4.0;
        pg.Tc = 2.0 * Smax + 2.0;
    }
    if (override_R > 0.0) pg.Ru = override_R;
    pg.wv = std::clamp(S, 0.5, 4.0);
    return pg;
}

// ------------------------------ engine ----------------------------------
struct PairIntegrand {
    const TestFunction& f;
    const TestFunction& g;

    double diff_product(double u, double v) const {
        const double x = 0.5 * (v + u), y = 0.5 * (v - u);
        return (f.eval(x) - f.eval(y)) * (g.eval(x) - g.eval(y));
    }
    // C(shift) = Int f(t) g(t - shift) dt
    double correlation(double shift, double T) const {
        return integrate_edges([&](double t) { return f.eval(t) * g.eval(t - shift); },
                               correlation_edges(shift, T), kOrder);
    }
    double product_integral(double T) const {
        return integrate_edges([&](double t) { return f.eval(t) * g.eval(t); },
                               mirrored(geometric_edges(0.5, T)), kOrder);
    }
};

std::vector<double> split_panels(const std::vector<double>& edges, int pieces) {
    std::vector<double> out;
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        for (int k = 0; k < pieces; ++k)
            out.push_back(edges[p] + (edges[p + 1] - edges[p]) * k / pieces);
    }
    out.push_back(edges.back());
    return out;
}

CovarianceResult integrate_kernel(const TestFunction& f, const TestFunction& g,
                                  const Kernel1D& ker, const KernelParams& p) {
    if (std::isnan(p.mu) || p.mu < 0.0)
        throw ParameterError("covariance: mu must lie in [0, inf]");
    if (!(p.quad_tolerance > 0.0))
        throw ParameterError("covariance: tolerance must be positive");
    const PairGeometry pg = pair_geometry(f, g, p.cutoff_radius);
    const PairIntegrand I{f, g};

    const double Ifg = I.product_integral(pg.Tc);

    // base panel layouts; refinement splits every panel
    const std::vector<double> u_near0 = geometric_edges(0.25, kU0);
    std::vector<double> v_half{0.0};
    for (double v = 0.0; v < pg.Rv;) {
        v += pg.wv;
        v_half.push_back(v);
    }
    const std::vector<double> v_near0 = mirrored(v_half);
    const std::vector<double> u_far0 = [&] {
        std::vector<double> e{kU0};
        double w = kU0;
        while (e.back() < pg.Ru) {
            e.push_back(std::min(e.back() + w, pg.Ru));
            w *= 2.0;
        }
        return e;
    }();

    auto level_value = [&](int level) {
        const int pieces = 1 << level;
        const std::vector<double> ue = split_panels(u_near0, pieces);
        const std::vector<double> ve = split_panels(v_near0, pieces);
        const std::vector<double> fe = split_panels(u_far0, pieces);

        std::vector<double> xs, ws, terms;
        // near region: u in (0, U0], v in [-Rv, Rv], 2d product rule
        std::vector<double> vx, vw;
        for (size_t q = 0; q + 1 < ve.size(); ++q) {
            gl_nodes_on(ve[q], ve[q + 1], kOrder, xs, ws);
            vx.insert(vx.end(), xs.begin(), xs.end());
            vw.insert(vw.end(), ws.begin(), ws.end());
        }
        for (size_t q = 0; q + 1 < ue.size(); ++q) {
            gl_nodes_on(ue[q], ue[q + 1], kOrder, xs, ws);
            for (size_t a = 0; a < xs.size(); ++a) {
                const double ku = ker.eval(xs[a]);
                if (ku == 0.0) continue;
                double inner = 0.0;
                for (size_t b = 0; b < vx.size(); ++b)
                    inner += vw[b] * I.diff_product(xs[a], vx[b]);
                terms.push_back(ws[a] * ku * inner);
            }
        }
        // far region: v integrated out exactly,
        // Int dv (f(x)-f(y))(g(x)-g(y)) = 4 I_fg - 2 C(u) - 2 C(-u)
        for (size_t q = 0; q + 1 < fe.size(); ++q) {
            gl_nodes_on(fe[q], fe[q + 1], kOrder, xs, ws);
            for (size_t a = 0; a < xs.size(); ++a) {
                const double ku = ker.eval(xs[a]);
                if (ku == 0.0) continue;
                const double band = 4.0 * Ifg - 2.0 * I.correlation(xs[a], pg.Tc) -
                                    2.0 * I.correlation(-xs[a], pg.Tc);
                terms.push_back(ws[a] * ku * band);
            }
        }
        // kernel tail beyond Ru on the u-independent band part
        terms.push_back(4.0 * Ifg * ker.tail(pg.Ru));
        return pairwise_sum(terms) / (4.0 * M_PI * M_PI);
    };

    // truncation bounds (conservative, documented): only the slow-decay case
    // has non-negligible tails at these radii. With |f| <= A (1+|x|)^{-1-s},
    //   far-u remainder  <= c A^2 / Ru^{2+s},
    //   near-v tail      <= c' A'^2 U0 / Rv^{2s+3},
    //   correlation tail <= c'' A / Tc^{1+s} propagated through kernel ~ 1/u.
    double trunc = 0.0;
    if (pg.slow) {
        const double s = std::max(1.0, pg.s_min);
        trunc = 8.0 / std::pow(pg.Ru, 2.0 + s) +
                4e3 * kU0 / std::pow(pg.Rv, 2.0 * s + 3.0) +
                8.0 / std::pow(pg.Tc, 1.0 + s);
    }

    double prev = level_value(0);
    for (int level = 1; level <= 3; ++level) {
        const double cur = level_value(level);
        const double delta = std::abs(cur - prev);
        if (delta <= 0.5 * p.quad_tolerance)
            return {cur, delta + trunc};
        prev = cur;
    }
    throw NumericalError("covariance: quadrature did not converge", prev);
}

} // namespace

CovarianceResult covariance(const TestFunction& f, const TestFunction& g,
                            const KernelParams& p) {
    return integrate_kernel(f, g, interp_kernel(p.mu), p);
}

CovarianceResult covariance_alt(const TestFunction& f, const KernelParams& p) {
    return integrate_kernel(f, f, alt_kernel(p.mu), p);
}

CovarianceResult comparison_covariance(const TestFunction& f, const KernelParams& p) {
    return integrate_kernel(f, f, comparison_kernel(p.mu), p);
}

double mu_star(double E, double param, double eta, MuStarMode mode) {
    if (!(E > -2.0 && E < 2.0)) throw ParameterError("mu_star: E must lie in (-2, 2)");
    if (!(eta > 0.0)) throw ParameterError("mu_star: eta must be positive");
    const double edge = std::sqrt(4.0 - E * E);
    switch (mode) {
        case MuStarMode::static_sigma:
            if (!(param >= -1.0 && param <= 1.0))
                throw ParameterError("mu_star: sigma must lie in [-1, 1]");
            return edge * (1.0 - param) / eta;
        case MuStarMode::dbm_beta2:
            if (!(param >= 0.0)) throw ParameterError("mu_star: time must be >= 0");
            return param * edge / eta;
        case MuStarMode::dbm_beta1:
            if (!(param >= 0.0)) throw ParameterError("mu_star: time must be >= 0");
            return edge * std::exp(-param) / eta;
    }
    throw ParameterError("mu_star: unknown mode");
}

} // namespace mesormt
