#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace triscale {

/// Autonomous ODE with optional analytic Jacobian (column-major, n x n).
struct OdeSystem {
    int n = 0;
    std::function<void(const double* u, double* f)> rhs;
    std::function<void(const double* u, double* jac)> jac;  // optional; FD fallback
};

enum class OdeScheme { DormandPrince, Radau };

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    double initial_step = 1e-4;
    double max_step = 0.0;       // 0: no cap
    double min_step = 1e-14;     // underflow threshold
    OdeScheme scheme = OdeScheme::DormandPrince;
    double fixed_step = 0.0;     // > 0: disable the controller
    long max_steps = 200'000'000;
    // Accepted states failing this test reject the step (step is halved).
    std::function<bool(const double* u)> admissible;
    // Applied to accepted states (e.g. snapping tiny negatives to zero or
    // preserving exact invariant-plane zeros); sees the step start state.
    // Returns true if it changed u1.
    std::function<bool(const double* u0, double* u1)> project;
};

/// One accepted step: endpoints plus endpoint derivatives; Hermite-cubic
/// interpolation between them.
struct OdeStepRecord {
    double t0, t1;
    std::vector<double> u0, u1, f0, f1;
    void eval(double t, double* out) const;
    void eval_deriv(double t, double* out) const;
};

struct OdeResult {
    bool ok = true;
    std::string message;
    long n_steps = 0;
    long n_rejected = 0;
};

/// Integrates from t0 to t1, invoking `on_step` after every accepted step.
/// Return false from `on_step` to stop early (result stays ok).
OdeResult integrate_ode(const OdeSystem& sys, std::vector<double>& u,
                        double t0, double t1, const OdeOptions& opts,
                        const std::function<bool(const OdeStepRecord&)>& on_step = {});

}  // namespace triscale
