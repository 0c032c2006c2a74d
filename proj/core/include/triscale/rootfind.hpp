#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace triscale {

/// Deterministic 1-D root finding: sign-change bracketing on a uniform grid,
/// bisection to `tol`, optional secant polish.
struct RootConfig {
    int grid_n = 4000;
    double tol = 1e-12;
    int max_iter = 200;
};

/// All bracketed roots of f on [lo, hi].
std::vector<double> find_roots(const std::function<double(double)>& f,
                               double lo, double hi, const RootConfig& cfg = {});

/// Bisection on a known bracket [lo, hi] with f(lo)*f(hi) <= 0.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = 1e-12, int max_iter = 200);

/// Local extrema locations of f on [lo, hi] (roots of the finite-difference
/// derivative, polished by bisection on the derivative sign).
std::vector<double> find_extrema(const std::function<double(double)>& f,
                                 double lo, double hi, const RootConfig& cfg = {});

/// Complex-step first derivative of an analytic scalar function.
template <typename F>
double complex_step(F&& f, double x, double h = 1e-100) {
    std::complex<double> r = f(std::complex<double>(x, h));
    return r.imag() / h;
}

}  // namespace triscale
