#pragma once
// Independent reference values for the covariance functional, computed on
// the Fourier side where it collapses to one dimension:
//   V_mu(f,g) = (1/4pi^2) Int_R |xi| fhat(xi) ghat(xi) (1 + e^{-mu|xi|}) dxi.
// The library integrates the (f(x)-f(y)) kernel in real space, so agreement
// is a genuine cross-check, not a reimplementation.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mesormt/quadrature.hpp"

namespace mesormt::testsupport {

inline double gauss_hat(double xi) {
    return std::sqrt(M_PI) * std::exp(-xi * xi / 4.0);
}

inline double poisson_hat(double xi) {
    return M_PI * std::exp(-std::abs(xi));
}

// Both builtin transforms are even and positive, so integrate xi >= 0 and
// double. 80 panels x 24 nodes on [0, 60] puts the quadrature error and the
// e^{-60}-scale tails far below 1e-12.
inline double weighted_fourier(const std::function<double(double)>& fhat,
                               const std::function<double(double)>& ghat,
                               const std::function<double(double)>& weight) {
    const double R = 60.0;
    const int panels = 80, order = 24;
    std::vector<double> x, w;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        gl_nodes_on(R * p / panels, R * (p + 1) / panels, order, x, w);
        for (size_t i = 0; i < x.size(); ++i)
            acc += w[i] * weight(x[i]) * fhat(x[i]) * ghat(x[i]);
    }
    return 2.0 * acc / (4.0 * M_PI * M_PI);
}

inline double v_mu_fourier(const std::function<double(double)>& fhat,
                           const std::function<double(double)>& ghat,
                           double mu) {
    return weighted_fourier(fhat, ghat, [mu](double xi) {
        return std::isinf(mu) ? xi : xi * (1.0 + std::exp(-mu * xi));
    });
}

// The smoothed comparison kernel mu^2/(r^2 (r^2 + mu^2)) = 1/r^2 - 1/(r^2 +
// mu^2) acts on (f(x)-f(y)) pairs with Fourier weight
//   |xi| - (1 - e^{-mu |xi|})/mu,
// from Int 2(1 - cos(xi r))/(r^2 + mu^2) dr = (2 pi/mu)(1 - e^{-mu |xi|}).
inline double comparison_fourier(const std::function<double(double)>& fhat,
                                 double mu) {
    return weighted_fourier(fhat, fhat, [mu](double xi) {
        return xi - (1.0 - std::exp(-mu * xi)) / mu;
    });
}

// Frozen 12-digit references for the gauss diagonal, cross-checked against
// the closed form V = (1 + I)/(2pi), I = 1 - mu sqrt(pi/2) e^{mu^2/2}
// erfc(mu/sqrt2). Exact endpoints: V_0 = 1/pi, V_inf = 1/(2pi).
struct FrozenPoint {
    double mu;
    double value;
};

inline const std::vector<FrozenPoint>& gauss_frozen() {
    static const std::vector<FrozenPoint> table = {
        {0.5, 0.248571018586}, {1.0, 0.213955245924}, {2.0, 0.184183894768},
        {4.0, 0.167652300043}, {8.0, 0.161533401343}};
    return table;
}

// Exact rationals for the poisson diagonal: V_0 = 1/4, V_inf = 1/8, and
// V_1 = (1/2)(1/4 + 1/9) = 13/72 from the e^{-2xi}, e^{-3xi} integrals.
inline constexpr double kPoissonV0 = 0.25;
inline constexpr double kPoissonVinf = 0.125;
inline constexpr double kPoissonV1 = 13.0 / 72.0;

// Frozen cross value used by the covariance acceptance check.
inline constexpr double kCrossVinf = 0.136606007392; // V_inf(gauss, poisson)

} // namespace mesormt::testsupport
