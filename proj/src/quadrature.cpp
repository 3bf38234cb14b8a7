#include "mesormt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mesormt {

static GaussLegendre compute_gl(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussLegendre r;
    r.x.assign(n, 0.0);
    r.w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-style initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            double pm = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pm) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

void gl_nodes_on(double a, double b, int order,
                 std::vector<double>& x, std::vector<double>& w) {
    const auto& gl = gauss_legendre(order);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    x.resize(gl.x.size());
    w.resize(gl.w.size());
    for (size_t i = 0; i < gl.x.size(); ++i) {
        x[i] = c + h * gl.x[i];
        w[i] = h * gl.w[i];
    }
}

std::vector<double> geometric_edges(double first_width, double radius) {
    if (!(first_width > 0.0) || !(radius > 0.0))
        throw std::invalid_argument("geometric_edges: widths must be positive");
    std::vector<double> e{0.0};
    double w = first_width;
    double pos = 0.0;
    while (pos < radius) {
        pos = std::min(pos + w, radius);
        e.push_back(pos);
        w *= 2.0;
    }
    return e;
}

double pairwise_sum(std::span<const double> v) {
    const size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double t : v) s += t;
        return s;
    }
    const size_t h = n / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

} // namespace mesormt
