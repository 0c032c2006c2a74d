#pragma once

#include <complex>
#include <vector>

#include "triscale/continuation.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"

namespace triscale {

/// One point of a planar-layer-problem equilibrium branch, parametrized by z.
struct LayerEqPoint {
    double z, x, y;
    std::complex<double> eig1, eig2;
    bool stable;
    SuperslowWhich curve;
    SuperslowBranch branch;
};

/// One point of a layer-problem cycle branch.
struct LayerCyclePoint {
    double z;
    double period;            // fast-time units
    double x_min, x_max;
    double mult;              // nontrivial Floquet multiplier (modulus)
    bool stable;
};

struct LayerCycleBranch {
    double z_hopf;            // origin of the branch
    std::vector<LayerCyclePoint> points;
    std::vector<double> snp_z;       // cyclic folds (z at multiplier +1 / branch fold)
    bool homoclinic_end = false;     // terminated by period blow-up
    double z_end = 0.0;
    int enclosed_at_end = 0;         // non-saddle equilibria enclosed near the end
};

struct FastSubsystemDiagram {
    std::vector<LayerEqPoint> equilibria;       // Z and L branches sampled vs z
    std::vector<HopfPointFast> hopf;
    std::vector<LayerCycleBranch> cycles;
    // bistability windows: z intervals with a stable equilibrium and a stable
    // cycle coexisting
    std::vector<std::array<double, 2>> bistable_z;
};

/// One-parameter (z) bifurcation structure of the planar fast subsystem.
FastSubsystemDiagram fast_subsystem_diagram(const Params& p, double z_lo, double z_hi,
                                            bool continue_cycles = true);

struct TwoParPoint {
    double z, beta2;
    double x = 0.0;
    int tag = 0;  // 0: Z-branch, 1: L-branch
};

struct FastSubsystemTwoPar {
    std::vector<TwoParPoint> snf;        // saddle-node (fold) curve of equilibria
    std::vector<TwoParPoint> hopf;       // Hopf curve (subcritical where delta>0)
    std::vector<double> hopf_delta;      // criticality along the Hopf curve
    std::vector<BifPoint> bt;            // double-zero points (par1=z, par2=beta2)
    std::vector<BifPoint> cusp;
    std::vector<BifPoint> gh;            // criticality sign changes on the Hopf curve
    std::vector<TwoParPoint> snp;        // saddle-node-of-cycles curve (best effort)
    bool hopf_self_intersects = false;
    std::array<double, 2> self_intersection{0.0, 0.0};  // (z, beta2)
    std::vector<TwoParPoint> nonphysical;  // curve points with beta2 <= 0
};

struct TwoParConfig {
    double beta2_lo = -0.35;
    double beta2_hi = 0.12;
    int n_x = 900;           // x-grid resolution along branch parametrizations
    bool trace_snp = true;
    int snp_steps = 14;      // beta2 steps per GH point when tracing SN_p
};

/// Two-parameter (z, beta2) bifurcation structure of the planar fast
/// subsystem at fixed alpha. Curves crossing beta2 <= 0 are kept and
/// reported as nonphysical.
FastSubsystemTwoPar fast_subsystem_2par(const Params& p, const TwoParConfig& cfg = {});

}  // namespace triscale
