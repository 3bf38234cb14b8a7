#pragma once
// Gauss-Legendre panel quadrature helpers shared by the spectral density,
// variance-kernel, and contour modules.

#include <cstddef>
#include <span>
#include <vector>

namespace mesormt {

// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1].
// Computed once per order by Newton iteration on P_n and cached.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;
};

const GaussLegendre& gauss_legendre(int n);

// Nodes/weights mapped onto [a, b].
void gl_nodes_on(double a, double b, int order,
                 std::vector<double>& x, std::vector<double>& w);

// Panel edges [e0, e1, ..., ek]: a fixed first panel width then geometric
// doubling, with the last edge capped at exactly `radius`. Used for
// integrands that are smooth on dyadic scales (resolvent-style kernels
// ~ 1/u^2).
std::vector<double> geometric_edges(double first_width, double radius);

// Deterministic pairwise (binary-tree) summation. Sum order depends only on
// the element order, never on threading.
double pairwise_sum(std::span<const double> v);

} // namespace mesormt
