#pragma once
// Semicircle law utilities: density, Stieltjes transform, and the
// deterministic centering term of mesoscopic linear statistics.

#include <complex>

#include "mesormt/test_functions.hpp"

namespace mesormt {

// Observation window inside the bulk: test functions are evaluated on
// (x - E)/eta. eta may be given directly or as N^{-alpha}.
struct MesoWindow {
    double E = 0.0;
    double eta = 0.0;
    int N = 0;

    static MesoWindow from_eta(double E, double eta, int N);
    static MesoWindow from_alpha(double E, double alpha, int N);
    void validate() const;
};

// rho(x) = (1/2pi) sqrt((4 - x^2)_+)
double semicircle_density(double x);

// Root of m^2 + z m + 1 = 0 with Im(m) Im(z) > 0 (Herglotz branch),
// picked by explicit sign test on the two quadratic roots.
std::complex<double> stieltjes_m(std::complex<double> z);

// N * Int_{-2}^{2} rho(x) f((x - E)/eta) dx, evaluated through x = 2 cos(th)
// so the edge square roots disappear:
//   N * (2/pi) * Int_0^pi sin^2(th) f((2 cos th - E)/eta) dth.
// Composite Gauss-Legendre with panel doubling until the change is below an
// absolute tolerance of 1e-11 * max(N, 1) (documented; criterion asks 1e-10*N).
double compensator(const TestFunction& f, const MesoWindow& w);

} // namespace mesormt
