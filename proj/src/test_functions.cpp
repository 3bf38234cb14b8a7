#include "mesormt/test_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mesormt/errors.hpp"

namespace mesormt {

namespace {

constexpr int kMaxOrder = 10;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Poly = std::vector<double>; // coefficients, p[k] * x^k

double horner(const Poly& p, double x) {
    double v = 0.0;
    for (size_t k = p.size(); k-- > 0;) v = v * x + p[k];
    return v;
}

Poly d_dx(const Poly& p) {
    Poly d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (size_t k = 1; k < p.size(); ++k) d[k - 1] = double(k) * p[k];
    return d;
}

Poly mul(const Poly& a, const Poly& b) {
    Poly c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Poly add(Poly a, const Poly& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (size_t k = 0; k < b.size(); ++k) a[k] += b[k];
    return a;
}

Poly scale(Poly a, double c) {
    for (double& v : a) v *= c;
    return a;
}

// gauss: f^{(n)}(x) = p_n(x) e^{-x^2}, p_0 = 1, p_{n+1} = p_n' - 2x p_n
const std::vector<Poly>& gauss_polys() {
    static const std::vector<Poly> polys = [] {
        std::vector<Poly> ps{{1.0}};
        for (int n = 0; n < kMaxOrder; ++n)
            ps.push_back(add(d_dx(ps[n]), mul({0.0, -2.0}, ps[n])));
        return ps;
    }();
    return polys;
}

// bump: f^{(n)}(x) = p_n(x) / (1-x^2)^{2n} * f(x),
// p_{n+1} = (1-x^2)^2 p_n' + 4n x (1-x^2) p_n - 2x p_n
const std::vector<Poly>& bump_polys() {
    static const std::vector<Poly> polys = [] {
        const Poly one_m_x2{1.0, 0.0, -1.0};
        std::vector<Poly> ps{{1.0}};
        for (int n = 0; n < kMaxOrder; ++n) {
            Poly next = mul(mul(one_m_x2, one_m_x2), d_dx(ps[n]));
            next = add(next, mul(scale(mul({0.0, 1.0}, one_m_x2), 4.0 * n), ps[n]));
            next = add(next, mul({0.0, -2.0}, ps[n]));
            ps.push_back(next);
        }
        return ps;
    }();
    return polys;
}

// poisson: f^{(n)}(x) = q_n(x) / (1+x^2)^{n+1},
// q_0 = 1, q_{n+1} = (1+x^2) q_n' - 2(n+1) x q_n
const std::vector<Poly>& poisson_polys() {
    static const std::vector<Poly> polys = [] {
        const Poly one_p_x2{1.0, 0.0, 1.0};
        std::vector<Poly> ps{{1.0}};
        for (int n = 0; n < kMaxOrder; ++n) {
            Poly next = mul(one_p_x2, d_dx(ps[n]));
            next = add(next, mul(scale(Poly{0.0, 1.0}, -2.0 * (n + 1)), ps[n]));
            ps.push_back(next);
        }
        return ps;
    }();
    return polys;
}

void check_order(int n) {
    if (n < 0 || n > kMaxOrder)
        throw ParameterError("test function derivative order out of range");
}

TestFunction make_gauss() {
    TestFunction f;
    f.name = "gauss";
    f.eval = [](double x) { return std::exp(-x * x); };
    f.deriv = [](int n, double x) {
        check_order(n);
        return horner(gauss_polys()[n], x) * std::exp(-x * x);
    };
    f.max_order = kMaxOrder;
    // true decay is super-polynomial; 6 is the declared conservative exponent
    f.decay_exponent = 6.0;
    f.fourier = [](double xi) { return std::sqrt(M_PI) * std::exp(-xi * xi / 4.0); };
    return f;
}

TestFunction make_bump() {
    TestFunction f;
    f.name = "bump";
    auto val = [](double x) {
        if (std::abs(x) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - x * x));
    };
    f.eval = val;
    f.deriv = [val](int n, double x) {
        check_order(n);
        if (std::abs(x) >= 1.0) return 0.0;
        const double v = val(x);
        if (v == 0.0) return 0.0; // exp underflow deep in the shoulder
        const double den = 1.0 - x * x;
        return horner(bump_polys()[n], x) * v / std::pow(den, 2.0 * n);
    };
    f.max_order = kMaxOrder;
    f.decay_exponent = kInf;
    f.support_radius = 1.0;
    return f;
}

TestFunction make_poisson() {
    TestFunction f;
    f.name = "poisson";
    f.eval = [](double x) { return 1.0 / (1.0 + x * x); };
    f.deriv = [](int n, double x) {
        check_order(n);
        const double den = 1.0 + x * x;
        return horner(poisson_polys()[n], x) / std::pow(den, n + 1.0);
    };
    f.max_order = kMaxOrder;
    f.decay_exponent = 1.0;
    f.fourier = [](double xi) { return M_PI * std::exp(-std::abs(xi)); };
    return f;
}

} // namespace

const TestFunction& builtin(const std::string& name) {
    static const TestFunction gauss = make_gauss();
    static const TestFunction bump = make_bump();
    static const TestFunction poisson = make_poisson();
    if (name == "gauss") return gauss;
    if (name == "bump") return bump;
    if (name == "poisson") return poisson;
    throw ParameterError("unknown test function: " + name);
}

TestFunction shifted_scaled(const TestFunction& f, double E, double eta) {
    if (!(eta > 0.0)) throw ParameterError("shifted_scaled: eta must be > 0");
    TestFunction g;
    g.name = f.name + "@(" + std::to_string(E) + "," + std::to_string(eta) + ")";
    auto base_eval = f.eval;
    auto base_deriv = f.deriv;
    g.eval = [base_eval, E, eta](double x) { return base_eval((x - E) / eta); };
    g.deriv = [base_deriv, E, eta](int n, double x) {
        return base_deriv(n, (x - E) / eta) / std::pow(eta, double(n));
    };
    g.max_order = f.max_order;
    g.decay_exponent = f.decay_exponent;
    g.support_radius = std::isinf(f.support_radius)
                           ? f.support_radius
                           : std::abs(E) + eta * f.support_radius;
    // no closed-form transform carried over (shift adds a phase)
    return g;
}

} // namespace mesormt
