#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "triscale/model.hpp"

namespace triscale {

/// Fold surface graph: y on the nontrivial prey nullcline.
template <typename T>
T F_surface(T x, T z, const Params& p) {
    return (p.beta1 + x) * (T(1) - x - p.alpha * x * z / (p.beta2 + x * x));
}

/// z-component of the fold curve, from phi = 0 and phi_x = 0.
template <typename T>
T fold_nu(T x, const Params& p) {
    const double B = p.beta2;
    const T q = B + x * x;
    return (1.0 - p.beta1 - 2.0 * x) * q * q
         / (p.alpha * (p.beta1 * B + 2.0 * B * x - p.beta1 * x * x));
}

/// y-component of the fold curve.
template <typename T>
T fold_mu(T x, const Params& p) {
    return F_surface(x, fold_nu(x, p), p);
}

/// Positive root of the fold-curve denominator (the infinite discontinuity).
double fold_x_d(const Params& p);

enum class FoldCase { Case1, Case2i, Case2ii, Case3 };
const char* to_string(FoldCase c);

enum class FoldBranch { Fminus, F0, Fplus };
const char* to_string(FoldBranch b);

struct FoldArc {
    FoldBranch label;
    double x_lo, x_hi;
    std::vector<std::array<double, 3>> pts;  // (x, y=mu, z=nu), positive octant
};

struct FoldCurve {
    double x_d;       // denominator root
    double x_half;    // (1-beta1)/2, the unique root of nu
    double x1, x2;    // min/max of the two
    std::vector<double> extrema;   // relative extrema of nu on the case interval
    double x_m, x_M;               // min/max locations when present (NaN otherwise)
    std::vector<double> mu_roots;  // roots of mu in the relevant interval
    FoldCase case_label;
    bool degenerate = false;
    std::vector<FoldArc> branches;
    double max_residual = 0.0;     // worst |phi|,|phi_x| over sampled branch points
};

/// Parametrizes, classifies and samples the fold curve (self-validating:
/// every sampled point is checked against phi = 0 and phi_x = 0).
FoldCurve fold_parametrization(const Params& p, int samples_per_arc = 400);
inline FoldCurve classify_fold_curve(const Params& p) { return fold_parametrization(p); }

struct SheetCounts {
    int attracting = 0;
    int repelling = 0;
};

/// Number of attracting/repelling sheets of S in the constant-y cross-section.
SheetCounts sheet_structure(double y, const Params& p);

/// z on the coexistence superslow curve (y from chi=0 clipped at 0, z from phi=0).
template <typename T>
T superslow_G(T x, const Params& p) {
    T y = y_on_z_curve(x, p);
    if (std::real(std::complex<double>(y)) < 0.0) y = T(0);
    return (p.beta2 + x * x) * (T(1) - x - y / (p.beta1 + x)) / (p.alpha * x);
}

/// z on the prey-predator-free superslow curve (y = 0 branch of phi=0).
template <typename T>
T superslow_H(T x, const Params& p) {
    return (T(1) - x) * (p.beta2 + x * x) / (p.alpha * x);
}

enum class SuperslowWhich { Z, L, K };
enum class SuperslowBranch { Minus, Zero, Plus };
const char* to_string(SuperslowBranch b);

/// 2x2 Jacobian of the planar layer problem (xdot = x phi, ydot = eps y chi).
Eigen::Matrix2d layer_jacobian(const State& s, const Params& p);

struct LayerEigen {
    std::complex<double> plus, minus;
    double Lambda;  // discriminant of the layer linearization along Z
};

/// Eigenvalues of the layer linearization at x on Z (y, z implied).
LayerEigen layer_eigenvalues(double x, const Params& p);

/// Roots of Lambda_eps on [0, 1] (degenerate nodes along Z).
std::vector<double> degenerate_nodes(const Params& p);

struct HopfPointFast {
    double x, y, z;
    double Delta = 0.0;      // criticality indicator (positive: subcritical)
    double omega = 0.0;      // imaginary part of the eigenvalue pair
    bool subcritical = true;
    SuperslowWhich curve = SuperslowWhich::Z;
    SuperslowBranch branch = SuperslowBranch::Minus;
};

/// Hopf criticality indicator evaluated at x on Z.
double hopf_delta(double x, const Params& p);

/// Hopf points of the layer problem on Z (trace zero, determinant positive,
/// complex pair) plus the stability-boundary points on L.
std::vector<HopfPointFast> hopf_points_fast(const Params& p);

struct SuperslowCurve {
    SuperslowWhich which;
    std::vector<double> fold_xs;             // knees (ascending)
    bool cubic = false;                      // exactly two knees
    std::vector<std::array<double, 3>> pts;  // sampled (x, y, z)
    double x_lo, x_hi;
    SuperslowBranch branch_of(double x) const;
};

struct SuperslowCurves {
    SuperslowCurve Z, L;
    std::vector<HopfPointFast> hopf;
    std::vector<double> degenerate_nodes;
    bool fold_flags_ok = true;  // false when a curve is not cubic-shaped
};

SuperslowCurves superslow_curves(const Params& p, int samples = 800);

}  // namespace triscale
