#pragma once
// Limiting covariance of mesoscopic linear statistics, interpolating between
// the orthogonal-class value at mu=0 and half of it at mu=inf:
//
//   V_mu(f,g) = (1/4pi^2) Int Int (f(x)-f(y))(g(x)-g(y))
//                 * [ 1/(x-y)^2 + ((x-y)^2 - mu^2)/((x-y)^2 + mu^2)^2 ] dx dy
//
// together with an algebraically equivalent split form and the smoothed
// comparison kernel mu^2 / ((x-y)^2 ((x-y)^2 + mu^2)) whose difference from
// V_mu isolates the transient part.

#include "mesormt/test_functions.hpp"

namespace mesormt {

struct KernelParams {
    double mu = 0.0;                 // in [0, inf], inf allowed
    double quad_tolerance = 1e-10;   // absolute convergence target
    double cutoff_radius = -1.0;     // |x-y| cutoff override; <0 means auto
};

struct CovarianceResult {
    double value = 0.0;
    double est_error = 0.0; // refinement delta plus documented truncation bounds
};

// V_mu(f, g). mu=0 doubles the 1/(x-y)^2 kernel; mu=inf keeps only it.
CovarianceResult covariance(const TestFunction& f, const TestFunction& g,
                            const KernelParams& p);

// Same value through the split kernel
//   2(x-y)^2/((x-y)^2+mu^2)^2 + mu^2/((x-y)^2 ((x-y)^2+mu^2)),
// diagonal case f=g only.
CovarianceResult covariance_alt(const TestFunction& f, const KernelParams& p);

// Smoothed comparison kernel alone (the second split term):
//   (1/4pi^2) Int Int ((f(x)-f(y))/(x-y))^2 * mu^2/((x-y)^2+mu^2) dx dy.
// Vanishes identically at mu=0, tends to V_inf as mu -> inf.
CovarianceResult comparison_covariance(const TestFunction& f, const KernelParams& p);

// Transition parameter mapping window/ensemble parameters to mu:
//   static_sigma: sqrt(4-E^2) (1-sigma)/eta      (param = sigma)
//   dbm_beta2:    t sqrt(4-E^2)/eta              (param = t, t=inf -> inf)
//   dbm_beta1:    sqrt(4-E^2) e^{-t}/eta         (param = t, t=inf -> 0)
enum class MuStarMode { static_sigma, dbm_beta2, dbm_beta1 };

double mu_star(double E, double param, double eta, MuStarMode mode);

} // namespace mesormt
