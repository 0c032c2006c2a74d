#pragma once

#include <optional>
#include <string>
#include <vector>

#include "triscale/integrate.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"

namespace triscale {

enum class PatternKind {
    SteadyState,
    HopfCycle,
    RelaxationOscillation,
    MMO,
    Bursting,
    Spiking,
    AmplitudeModulated
};
const char* to_string(PatternKind k);

enum class SaoHint { F0, Fplus, Fminus, None };
const char* to_string(SaoHint h);

struct PatternLabel {
    PatternKind kind = PatternKind::SteadyState;
    std::vector<std::array<int, 2>> mmo_signature;  // (L_k, s_k) per period
    int spikes_per_burst = 0;
    SaoHint sao_location_hint = SaoHint::None;
    double period = 0.0;              // dominant period (trajectory frame)
    double quiescent_fraction = 0.0;  // share of the period outside LAO excursions
    PatternKind runner_up = PatternKind::SteadyState;
    bool ambiguous = false;
    std::string detail;
};

struct ClassifierThresholds {
    double sao_lao_amplitude_fraction = 0.2;  // of the global x-range
    double spike_prominence = 1e-7;           // absolute noise floor on excursions
    double burst_quiescence_gap = 8.0;        // intermediate-time units
    double periodicity_tol = 1e-5;
    double steady_range = 1e-6;
    double relaxation_time_ratio = 10.0;
    // minimum fraction of time attached to the superslow curve (|phi| and
    // |chi| both small) for small oscillations to count as slow-passage SAOs;
    // transient spiral-in wiggles of two-timescale relaxation fall below it
    double superslow_attachment_min = 0.4;
};

/// Labels the attractor from the post-transient part of the trajectory.
/// When params are supplied, a steady-state candidate is cross-checked
/// against the stability of the nearest equilibrium (a slow passage near an
/// unstable state never counts as steady).
PatternLabel classify(const Trajectory& traj, const ClassifierThresholds& th = {},
                      const Params* params = nullptr);

/// Attributes the SAO cluster of an MMO/bursting trajectory to the nearest
/// fold-curve branch in the (x, z) projection.
SaoHint sao_locator(const Trajectory& traj, const FoldCurve& fc,
                    const ClassifierThresholds& th = {});

struct RegimeCell {
    double beta2, alpha;
    PatternLabel label;
    bool ok = true;
    std::string error;
};

struct RegimeMapConfig {
    double t_end = 1500.0;  // intermediate time per cell
    IntegratorConfig integ;
    ClassifierThresholds thresholds;
    int n_threads = 0;      // 0: hardware concurrency
    unsigned seed = 0;      // recorded in outputs; initial conditions are
                            // deterministic (perturbed E* with fixed fallback)
};

struct RegimeMap {
    std::vector<double> beta2s, alphas;
    std::vector<RegimeCell> cells;  // row-major: alpha outer, beta2 inner
    RegimeMapConfig cfg;
};

RegimeMap regime_map(const Params& base, const std::vector<double>& beta2s,
                     const std::vector<double>& alphas, const RegimeMapConfig& cfg = {});

}  // namespace triscale
