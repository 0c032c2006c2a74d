#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "triscale/params.hpp"

namespace triscale {

struct State {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Time frames related by t (fast), s = epsilon*t (intermediate),
/// tau = epsilon*delta*t (slow).
enum class Frame { Fast, Intermediate, Slow };

/// Multiplier converting the fast-frame vector field into `f`.
inline double frame_factor(Frame f, const Params& p) {
    switch (f) {
        case Frame::Fast: return 1.0;
        case Frame::Intermediate: return 1.0 / p.epsilon;
        default: return 1.0 / (p.epsilon * p.delta);
    }
}

// Nullcline functions. Templated so complex-step differentiation can be
// applied to any composite built from them.
template <typename T>
T phi(T x, T y, T z, const Params& p) {
    return T(1) - x - y / (p.beta1 + x) - p.alpha * x * z / (p.beta2 + x * x);
}

template <typename T>
T chi(T x, T y, const Params& p) {
    return x / (p.beta1 + x) - p.delta1 - p.gamma1 * y;
}

template <typename T>
T psi(T x, T z, const Params& p) {
    return p.alpha * (x * x / (p.beta2 + x * x) - p.delta2)
         + (1.0 - p.alpha) * (T(1) / (T(1) + p.gamma2 * z) - p.delta3);
}

/// First through third partial derivatives of phi/chi/psi used by the
/// manifold and criticality formulas.
struct Partials {
    double phi_x, phi_y, phi_z;
    double phi_xx, phi_xy, phi_xz;
    double phi_xxx;
    double chi_x, chi_y, chi_xx;
    double psi_x, psi_z, psi_zz;
};

Partials partials(const State& s, const Params& p);

/// Vector field in the requested frame.
std::array<double, 3> vector_field(const State& s, const Params& p, Frame f = Frame::Fast);

/// Analytic Jacobian in the requested frame (rows scale with the field).
Eigen::Matrix3d jacobian(const State& s, const Params& p, Frame f = Frame::Fast);

enum class EquilibriumKind { Origin, PreyOnly, Exy, Exz, Coexistent, AxisZ };

const char* to_string(EquilibriumKind k);

struct Equilibrium {
    State s;
    EquilibriumKind kind;
    std::array<std::complex<double>, 3> eigenvalues;  // fast frame
    double residual = 0.0;
};

struct EquilibriumConfig {
    int grid_n = 2000;
    double x_max = 1.2;
};

/// All equilibria in the closed positive octant: origin, prey-only (1,0,0),
/// z-axis state when psi(0,z)=0 has a positive root, boundary states Exy/Exz
/// and coexistence states E*, found by 1-D reduction along x with grid
/// bracketing, bisection and Newton polish.
std::vector<Equilibrium> equilibria(const Params& p, const EquilibriumConfig& cfg = {});

/// y on the coexistence nullcline chi=0 (negative below the transcritical x).
template <typename T>
T y_on_z_curve(T x, const Params& p) {
    return (x / (p.beta1 + x) - p.delta1) / p.gamma1;
}

}  // namespace triscale
