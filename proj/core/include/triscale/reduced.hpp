#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "triscale/integrate.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"

namespace triscale {

enum class DesingLimit { FiniteDelta, DoubleLimit };

/// Desingularized reduced field on S in the (x, z) chart, y = F(x, z).
/// FiniteDelta: (phi_y y chi + delta phi_z z psi, -delta phi_x z psi).
/// DoubleLimit: (phi_y y chi, 0).
template <typename T>
std::array<T, 2> desingularized_field(T x, T z, const Params& p, DesingLimit lim) {
    const T y = F_surface(x, z, p);
    const T b1x = p.beta1 + x;
    const T phi_y = T(-1) / b1x;
    const T ch = chi(x, y, p);
    if (lim == DesingLimit::DoubleLimit) return {phi_y * y * ch, T(0)};
    const T q = p.beta2 + x * x;
    const T phi_z = -p.alpha * x / q;
    const T phi_x = T(-1) + y / (b1x * b1x) - p.alpha * z * (p.beta2 - x * x) / (q * q);
    const T ps = psi(x, z, p);
    return {phi_y * y * ch + p.delta * phi_z * z * ps, -p.delta * phi_x * z * ps};
}

/// Jacobian of the desingularized field (complex-step derivatives).
Eigen::Matrix2d desingularized_jacobian(double x, double z, const Params& p,
                                        DesingLimit lim = DesingLimit::FiniteDelta);

enum class FoldedKind { Node, Saddle, Focus, Degenerate };
const char* to_string(FoldedKind k);

struct FoldedSingularity {
    State s;                 // location on the fold curve
    std::complex<double> eig1, eig2;  // desingularized Jacobian eigenvalues
    FoldedKind kind;
    FoldBranch branch;
    double mu_ratio = 0.0;   // weak/strong ratio when eigenvalues are real
    double res_phi = 0.0, res_phi_x = 0.0, res_eq = 0.0;
};

/// Equilibria of the desingularized flow on the fold curve, classified by the
/// 2x2 Jacobian; near-zero weak eigenvalue flags Degenerate (FSN candidate).
std::vector<FoldedSingularity> folded_singularities(const Params& p);

/// Singular funnel of a folded node: the strong-canard polyline (backward
/// orbit through the node along the strong eigendirection) together with the
/// adjacent fold-branch arc; membership by winding number.
struct SingularFunnel {
    FoldedSingularity node;
    std::vector<std::array<double, 2>> gamma;     // (x, z), far end -> node
    std::vector<std::array<double, 2>> fold_arc;  // node -> far end
    bool truncated = false;
    bool contains(double x, double z) const;
};

SingularFunnel strong_canard(const FoldedSingularity& fn, const Params& p);

/// Reduced flow on the invariant plane x = 0 with the entry-exit predictor.
/// The accumulated-instability integral starts at the supplied landing point.
struct PlaneFlowResult {
    std::vector<double> t;
    std::vector<double> y, z;
    double t_tc = -1.0;      // transcritical crossing y = beta1
    double t_exit = -1.0;    // way-in/way-out zero of the accumulated integral
    double y_exit = 0.0, z_exit = 0.0;
    bool exit_found = false;
};

PlaneFlowResult plane_flow(double y0, double z0, const Params& p, double t_end = 400.0);

/// Delayed-Hopf exit predictor along Z: accumulates Re(lambda) in slow time
/// from the entry point; exit where the integral returns to zero past the
/// Hopf point on the same branch.
struct DelayedHopfResult {
    double x_entry = 0.0;
    double x_hopf = 0.0;
    double x_exit = 0.0;
    double z_exit = 0.0;
    bool found = false;
};

DelayedHopfResult delayed_hopf_exit(double x_entry, const Params& p);

/// Loci in (beta2, alpha) where a folded singularity crosses an ordinary one:
/// zero contours of phi_x evaluated at E_xz (curve a) and at E* (curve b).
struct Fsn2Curves {
    std::vector<std::array<double, 2>> a;  // (beta2, alpha)
    std::vector<std::array<double, 2>> b;
};

Fsn2Curves fsn2_curves(const Params& base, double beta2_lo, double beta2_hi,
                       double alpha_lo, double alpha_hi, int n_beta2 = 60,
                       int n_alpha = 60);

}  // namespace triscale
