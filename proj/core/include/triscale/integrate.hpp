#pragma once

#include <array>
#include <string>
#include <vector>

#include "triscale/model.hpp"
#include "triscale/ode.hpp"

namespace triscale {

enum class Scheme { Auto, Explicit, Implicit };

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-11;
    double max_step = 0.0;       // integration-frame units; 0 = uncapped
    double initial_step = 1e-4;
    Frame frame = Frame::Intermediate;
    double nonneg_floor = 1e-12;
    Scheme scheme = Scheme::Auto;            // Auto: implicit when eps*delta <= 0.01
    double transient_skip_fraction = 0.4;    // used by attractor diagnostics
};

OdeScheme resolve_scheme(const IntegratorConfig& cfg, const Params& p);

enum class EventKind { XMax, XMin, SectionCross, Custom };

struct Event {
    double t;
    EventKind kind;
    State s;
};

/// Dense solution path: node states plus node derivatives for Hermite
/// interpolation, and detected x-extremum events.
struct Trajectory {
    Frame frame = Frame::Intermediate;
    std::vector<double> t;
    std::vector<State> u;
    std::vector<std::array<double, 3>> du;
    std::vector<Event> events;
    bool failed = false;
    std::string failure;

    State eval(double time) const;
    std::array<double, 3> eval_deriv(double time) const;
    double t_begin() const { return t.empty() ? 0.0 : t.front(); }
    double t_end() const { return t.empty() ? 0.0 : t.back(); }
};

/// Adaptive integration of the model from s0 over [0, t_end] in cfg.frame.
/// Steps that would drive a coordinate below -nonneg_floor are rejected;
/// coordinates in [-nonneg_floor, 0] snap to 0. On step-size underflow the
/// partial trajectory is returned with failed=true.
Trajectory simulate(const Params& p, const State& s0, double t_end,
                    const IntegratorConfig& cfg = {});

struct Section {
    std::array<double, 3> normal = {0.0, 1.0, 0.0};
    double offset = 0.0;
    int direction = +1;  // +1: increasing normal component, -1: decreasing, 0: both
};

struct PoincareResult {
    std::vector<State> points;
    std::vector<double> times;
    bool complete = true;  // false if fewer crossings found than requested
};

/// First n transversal crossings after the transient-skip time, located by
/// bisection on the dense output to 1e-8 time tolerance.
PoincareResult poincare_section(const Params& p, const State& s0, const Section& sec,
                                int n_crossings, double t_end,
                                const IntegratorConfig& cfg = {});

struct OrderMeasurement {
    double order = 0.0;
    std::vector<double> steps;
    std::vector<double> errors;
};

/// Measured convergence order on a fixed-step run of a linear 3x3 system
/// with eigenvalues {-1,-10,-100} against the closed-form solution.
OrderMeasurement convergence_order(OdeScheme scheme);

}  // namespace triscale
