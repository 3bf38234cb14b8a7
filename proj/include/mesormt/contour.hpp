#pragma once
// Almost-analytic extension of a smooth real function and the approximate
// Cauchy reconstruction identity on a horizontal strip: for real lambda
// inside the strip of half-height a,
//   f(lambda) = (i/2pi) oint_{dD} ftilde(z)/(lambda - z) dz
//             + (1/pi)  int_{D} dbar ftilde(z)/(lambda - z) dx dy,
// where ftilde is the order-k extension. The boundary integral runs over
// the two horizontal lines Im z = -a (left to right) and Im z = +a (right
// to left); the vertical ends vanish under the truncation bounds below.

#include <complex>

#include "mesormt/test_functions.hpp"

namespace mesormt {

using cplx = std::complex<double>;

// ftilde(x + iy) = sum_{j<=k} (iy)^j f^(j)(x)/j!. Needs derivatives of f
// up to order k+1 (the dbar value uses f^(k+1)).
struct AlmostAnalyticExtension {
    const TestFunction* base;
    int k;

    AlmostAnalyticExtension(const TestFunction& f, int order_k);

    struct Value {
        cplx value;
        cplx dbar; // (d_x + i d_y)/2 applied to the extension
    };
    // value = extension at z; dbar = (iy)^k f^(k+1)(x) / (2 k!): the first
    // k-1 y-orders cancel pairwise between the x- and y-derivative sums.
    Value eval(cplx z) const;
};

struct CauchyReconstruction {
    double value = 0.0;    // boundary + area
    double boundary = 0.0; // real part of the contour term
    double area = 0.0;     // real part of the strip integral term
};

// Evaluates both pieces at a chosen resolution. The quadrature order grows
// with resolution (panels fixed, nodes per panel = 2 + 2 * resolution), so
// errors decrease through resolutions 1, 2, 4 without hitting the roundoff
// floor at the battery's tolerances. The area integrand's 1/(lambda - z)
// singularity is handled by a polar patch: a disc of radius a/2 centred at
// lambda (where the r dr measure cancels the 1/r), polar wedges out to the
// enclosing square, and Cartesian tiles for the rest of the strip.
//
// Truncation: integrals are cut at |x| <= R with R from the base function's
// decay. For the compactly supported and super-polynomially decaying
// builtins the tail is below 1e-300; for the rational builtin (decay
// exponent s = 1) the boundary tail is bounded by 2/(pi R) * a max|f| and
// the area tail by the same order, both < 1e-9 at the default R = 16384.
CauchyReconstruction cauchy_reconstruct(const TestFunction& f, double lambda,
                                        double a, int k, int resolution);

} // namespace mesormt
