#include "mesormt/contour.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mesormt/errors.hpp"
#include "mesormt/quadrature.hpp"

namespace mesormt {

AlmostAnalyticExtension::AlmostAnalyticExtension(const TestFunction& f,
                                                 int order_k)
    : base(&f), k(order_k) {
    if (order_k < 1) throw ParameterError("extension order must be >= 1");
    if (order_k + 1 > f.max_order)
        throw ParameterError("extension order " + std::to_string(order_k) +
                             " needs derivatives beyond " + f.name +
                             "'s declared maximum");
}

AlmostAnalyticExtension::Value AlmostAnalyticExtension::eval(cplx z) const {
    const double x = z.real();
    const double y = z.imag();
    const cplx iy(0.0, y);
    Value out;
    cplx pw = 1.0; // (iy)^j / j!
    out.value = base->deriv(0, x);
    for (int j = 1; j <= k; ++j) {
        pw *= iy / double(j);
        out.value += pw * base->deriv(j, x);
    }
    // pw is now (iy)^k / k!; everything below order k cancels in dbar
    out.dbar = 0.5 * pw * base->deriv(k + 1, x);
    return out;
}

namespace {

// x-breakpoints adapted to the integrands: dyadic clustering at the support
// boundary (flat-but-nonanalytic endpoints), geometric coverage of decaying
// tails, and pole-distance doubling around lambda.
std::vector<double> feature_edges(const TestFunction& f, double lambda,
                                  double rho, double R) {
    std::vector<double> e = {-R, R, lambda};
    if (std::isfinite(f.support_radius)) {
        const double S = f.support_radius;
        for (int j = 0; j <= 12; ++j) {
            double t = S * (1.0 - std::ldexp(1.0, -j));
            e.push_back(t);
            e.push_back(-t);
        }
        e.push_back(S);
        e.push_back(-S);
    } else {
        e.push_back(0.0);
        for (double t = 0.5; t < R; t *= 2.0) {
            e.push_back(t);
            e.push_back(-t);
        }
    }
    for (double t = rho; t < R; t *= 2.0) {
        e.push_back(lambda + t);
        e.push_back(lambda - t);
    }
    std::vector<double> out;
    for (double t : e)
        if (t >= -R && t <= R) out.push_back(t);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double u, double v) {
                              return std::abs(u - v) < 1e-12;
                          }),
              out.end());
    return out;
}

double truncation_radius(const TestFunction& f, double lambda, double a) {
    double rf;
    if (std::isfinite(f.support_radius))
        rf = f.support_radius;
    else if (f.decay_exponent >= 2.0)
        rf = 32.0;
    else
        rf = 16384.0; // 1/x^2-type envelope: tail below 1e-9 here
    return std::max(rf, std::abs(lambda) + a + 2.0);
}

} // namespace

CauchyReconstruction cauchy_reconstruct(const TestFunction& f, double lambda,
                                        double a, int k, int resolution) {
    if (!(a > 0.0)) throw ParameterError("strip half-height must be positive");
    if (resolution < 1) throw ParameterError("resolution must be >= 1");
    AlmostAnalyticExtension ext(f, k);

    const int order = 2 + 2 * std::min(resolution, 16);
    const double rho = 0.5 * a;
    const double R = truncation_radius(f, lambda, a);
    const std::vector<double> xe = feature_edges(f, lambda, rho, R);

    std::vector<double> xs, xw, ys, yw, rs, rw, ts, tw;
    std::vector<double> pieces;

    // Boundary: ccw contour = bottom line (left to right) + top line (right
    // to left); conjugate symmetry folds the pair into -2 Im(bottom)/(2pi).
    pieces.clear();
    for (size_t p = 0; p + 1 < xe.size(); ++p) {
        gl_nodes_on(xe[p], xe[p + 1], order, xs, xw);
        cplx acc = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            cplx z(xs[i], -a);
            acc += xw[i] * ext.eval(z).value / (lambda - z);
        }
        pieces.push_back(acc.imag());
    }
    const double boundary = -pairwise_sum(pieces) / M_PI;

    // Area: conjugate symmetry again restricts to the upper half strip and
    // doubles the real part. In polar coordinates around lambda the measure
    // cancels the singularity: dbar/(lambda - z) r dr dth = -dbar e^{-i th}.
    pieces.clear();

    // polar disc, th in [0, pi], r in [0, rho]
    for (int tp = 0; tp < 4; ++tp) {
        gl_nodes_on(tp * M_PI / 4.0, (tp + 1) * M_PI / 4.0, order, ts, tw);
        for (int rp = 0; rp < 2; ++rp) {
            gl_nodes_on(rp * rho / 2.0, (rp + 1) * rho / 2.0, order, rs, rw);
            cplx acc = 0.0;
            for (size_t i = 0; i < ts.size(); ++i) {
                const cplx dir = std::polar(1.0, ts[i]);
                const cplx phase = std::conj(dir);
                for (size_t j = 0; j < rs.size(); ++j) {
                    cplx z = lambda + rs[j] * dir;
                    acc -= tw[i] * rw[j] * phase * ext.eval(z).dbar;
                }
            }
            pieces.push_back(acc.real());
        }
    }

    // polar wedges from the disc out to the enclosing square
    // [lambda - rho, lambda + rho] x [-rho, rho]
    for (int wp = 0; wp < 4; ++wp) {
        gl_nodes_on(wp * M_PI / 4.0, (wp + 1) * M_PI / 4.0, order, ts, tw);
        cplx acc = 0.0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const cplx dir = std::polar(1.0, ts[i]);
            const cplx phase = std::conj(dir);
            const double rmax =
                rho / std::max(std::abs(dir.real()), std::abs(dir.imag()));
            gl_nodes_on(rho, rmax, order, rs, rw);
            for (size_t j = 0; j < rs.size(); ++j) {
                cplx z = lambda + rs[j] * dir;
                acc -= tw[i] * rw[j] * phase * ext.eval(z).dbar;
            }
        }
        pieces.push_back(acc.real());
    }

    // Cartesian tiles for the rest of the upper strip: full height columns
    // left and right of the square, the sliver above it in between.
    auto tile = [&](double x0, double x1, double y0, double y1) {
        gl_nodes_on(x0, x1, order, xs, xw);
        gl_nodes_on(y0, y1, order, ys, yw);
        cplx acc = 0.0;
        for (size_t i = 0; i < xs.size(); ++i)
            for (size_t j = 0; j < ys.size(); ++j) {
                cplx z(xs[i], ys[j]);
                acc += xw[i] * yw[j] * ext.eval(z).dbar / (lambda - z);
            }
        pieces.push_back(acc.real());
    };

    for (size_t p = 0; p + 1 < xe.size(); ++p) {
        double x0 = xe[p], x1 = xe[p + 1];
        if (x1 <= lambda - rho || x0 >= lambda + rho) {
            tile(x0, x1, 0.0, 0.5 * a);
            tile(x0, x1, 0.5 * a, a);
        }
    }
    tile(lambda - rho, lambda, rho, a);
    tile(lambda, lambda + rho, rho, a);

    const double area = 2.0 * pairwise_sum(pieces) / M_PI;

    CauchyReconstruction out;
    out.boundary = boundary;
    out.area = area;
    out.value = boundary + area;
    return out;
}

} // namespace mesormt
