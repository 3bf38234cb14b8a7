#include "mesormt/spectral.hpp"

#include <cmath>

#include "mesormt/errors.hpp"
#include "mesormt/quadrature.hpp"

namespace mesormt {

MesoWindow MesoWindow::from_eta(double E, double eta, int N) {
    MesoWindow w{E, eta, N};
    w.validate();
    return w;
}

MesoWindow MesoWindow::from_alpha(double E, double alpha, int N) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("window: alpha must lie in (0, 1)");
    if (N < 1) throw ParameterError("window: N must be >= 1");
    MesoWindow w{E, std::pow(double(N), -alpha), N};
    w.validate();
    return w;
}

void MesoWindow::validate() const {
    if (!(E > -2.0 && E < 2.0))
        throw ParameterError("window: E must lie strictly inside (-2, 2)");
    if (!(eta > 0.0 && eta <= 10.0))
        throw ParameterError("window: eta must lie in (0, 10]");
    if (N < 1) throw ParameterError("window: N must be >= 1");
}

double semicircle_density(double x) {
    const double t = 4.0 - x * x;
    return t > 0.0 ? std::sqrt(t) / (2.0 * M_PI) : 0.0;
}

std::complex<double> stieltjes_m(std::complex<double> z) {
    if (z.imag() == 0.0)
        throw ParameterError("stieltjes_m: z must be off the real axis");
    std::complex<double> s = std::sqrt(z * z - 4.0);
    // align s with z so z + s never cancels, then get the small root as the
    // reciprocal of the large one (the roots multiply to 1); this keeps the
    // quadratic residual at machine scale even for |z| >> 1
    if (z.real() * s.real() + z.imag() * s.imag() < 0.0) s = -s;
    const std::complex<double> big = -0.5 * (z + s);
    const std::complex<double> other = 1.0 / big;
    // exactly one root satisfies Im(m) Im(z) > 0
    return (big.imag() * z.imag() > 0.0) ? big : other;
}

double compensator(const TestFunction& f, const MesoWindow& w) {
    w.validate();
    // integrand in theta; sharp features have width ~ eta/2, and panel
    // doubling refines past them
    auto g = [&](double th) {
        const double s = std::sin(th);
        return s * s * f.eval((2.0 * std::cos(th) - w.E) / w.eta);
    };
    const double tol = 1e-11 * std::max(1.0, double(w.N));
    const int order = 16;
    double prev = 0.0;
    std::vector<double> xs, ws, terms;
    for (int panels = 8; panels <= (1 << 16); panels *= 2) {
        terms.clear();
        const double h = M_PI / panels;
        for (int p = 0; p < panels; ++p) {
            gl_nodes_on(p * h, (p + 1) * h, order, xs, ws);
            for (size_t k = 0; k < xs.size(); ++k) terms.push_back(ws[k] * g(xs[k]));
        }
        const double val = w.N * (2.0 / M_PI) * pairwise_sum(terms);
        if (panels > 8 && std::abs(val - prev) < tol) return val;
        prev = val;
    }
    throw NumericalError("compensator: quadrature did not converge", prev);
}

} // namespace mesormt
