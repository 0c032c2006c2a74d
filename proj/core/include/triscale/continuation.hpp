#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "triscale/integrate.hpp"
#include "triscale/model.hpp"

namespace triscale {

enum class BifKind {
    Hopf,
    SaddleNode,
    Transcritical,
    PeriodDoubling,
    Torus,
    CyclicFold,
    HomoclinicApprox,
    BogdanovTakens,
    Cusp,
    GeneralizedHopf
};
const char* to_string(BifKind k);

struct BifPoint {
    BifKind kind;
    double par1 = 0.0, par2 = 0.0;  // continuation parameter value(s)
    State s;
    double period = 0.0;     // for cycle bifurcations
    double diagnostic = 0.0; // e.g. Hopf frequency or criticality
};

struct BranchPoint {
    double par1 = 0.0, par2 = 0.0;
    State s;                         // equilibrium or orbit anchor point
    std::array<std::complex<double>, 3> eig;  // eigenvalues or Floquet multipliers
    double period = 0.0;
    double x_min = 0.0, x_max = 0.0; // orbit extrema of x (equals s.x for equilibria)
    bool stable = false;
    double residual = 0.0;
};

enum class BranchKind { Equilibrium, PeriodicOrbit };

struct Branch {
    BranchKind kind = BranchKind::Equilibrium;
    std::string parameter = "beta2";
    std::vector<BranchPoint> points;
    std::vector<BifPoint> detected;
    bool truncated = false;
    std::string note;
};

struct ContinuationConfig {
    double step = 1e-3;        // initial arclength step
    double step_min = 1e-9;
    double step_max = 0.02;
    int max_points = 4000;
    double newton_tol = 1e-11;
    int newton_max_iter = 12;
};

/// Which model parameter a continuation varies.
double* param_slot(Params& p, const std::string& name);

/// Pseudo-arclength continuation of an equilibrium branch with eigenvalue
/// monitoring; Hopf/fold sign changes are bisected in arclength to 1e-8 in
/// the parameter.
Branch continue_equilibrium(const Params& p0, const std::string& parameter,
                            double from, double to, const State& seed,
                            const ContinuationConfig& cfg = {});

struct HopfCurvePoint {
    double beta2, alpha;
    State s;
    double omega2;  // squared Hopf frequency (from the bialternate system)
};

struct HopfCurve {
    std::vector<HopfCurvePoint> points;
    std::vector<BifPoint> degeneracies;  // Bogdanov-Takens endpoints
    bool closed = false;
};

/// Two-parameter Hopf-curve continuation in (beta2, alpha) from a seed Hopf
/// point, using the bialternate-product test function.
HopfCurve continue_hopf_2par(const Params& p0, double beta2_seed, const State& seed,
                             double beta2_lo, double beta2_hi, double alpha_lo,
                             double alpha_hi, const ContinuationConfig& cfg = {});

struct ShootingConfig {
    int segments = 1;           // multiple-shooting segments
    double rtol = 1e-10;
    double atol = 1e-12;
    double newton_tol = 1e-9;
    int newton_max_iter = 14;
    double period_cap = 1e4;    // fast-time units: homoclinic approximation
    double step = 0.05;         // initial arclength step (scaled coordinates)
    double step_min = 1e-7;
    double step_max = 0.5;
    int max_points = 2000;
    // parameter units per unit of arclength coordinate: balances parameter
    // progress against orbit-shape drift in the arclength metric
    double par_scale = 1e-3;
};

/// Locates a periodic orbit near the attractor of the flow at parameter value
/// `par_value` (Poincare seeding + Newton shooting). Returns false on failure.
bool find_periodic_orbit(const Params& p, double t_settle, const State& guess,
                         const ShootingConfig& cfg, State& anchor, double& period);

/// Continuation of a periodic-orbit branch in one parameter by shooting with
/// Floquet multipliers; detects period-doubling, torus and cyclic-fold points
/// and flags period blow-up as a homoclinic approximation.
Branch continue_periodic(const Params& p0, const std::string& parameter,
                         double from, double to, const State& anchor0,
                         double period0, const ShootingConfig& cfg = {});

/// Floquet multipliers of the cycle through `anchor` with the given period
/// (monodromy by variational integration).
std::array<std::complex<double>, 3> floquet_multipliers(const Params& p,
                                                        const State& anchor,
                                                        double period,
                                                        double rtol = 1e-10);

}  // namespace triscale
