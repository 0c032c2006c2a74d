#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace triscale {

inline constexpr const char* kVersion = "0.1.0";

/// Structured non-fatal diagnostic attached to parameter handling.
struct Warning {
    std::string code;
    std::string message;
};

/// Dimensionless parameter set of the food-web model.
///
/// beta2 is the saturation constant of the sigmoidal (Holling III) response
/// exactly as it appears in the denominators `beta2 + x^2`, i.e. the square
/// of the scaled semi-saturation density. All published parameter values
/// quote this quantity directly.
struct Params {
    double alpha  = 1.0;
    double beta1  = 0.1;
    double beta2  = 0.01;
    double delta1 = 0.15;
    double delta2 = 0.35;
    double delta3 = 0.65;
    double gamma1 = 4.1;
    double gamma2 = 15.0;
    double epsilon = 0.05;  // intermediate/fast rate ratio
    double delta   = 0.1;   // slow/intermediate rate ratio

    /// Baseline parameter set used throughout the reference experiments;
    /// alpha and beta2 are left to the caller.
    static Params preset_paper(double alpha, double beta2);

    /// Hard-validates positivity/range constraints (throws std::invalid_argument)
    /// and returns structured warnings for soft assumption violations, so that
    /// continuation runs may cross nonphysical regions (e.g. beta2 <= 0).
    std::vector<Warning> validate() const;
};

/// Raw (dimensional) model inputs.
struct DimensionalParams {
    double r, K, p1, H1, b1, d1, m1;
    double p2, H2, b2, d2;
    double q, d3, m2;
    double alpha;
};

struct NondimScales {
    double epsilon1, epsilon2, epsilon3;
    double Y0, Z0;
};

struct NondimResult {
    Params params;
    NondimScales scales;
    std::vector<Warning> warnings;
};

/// Maps dimensional inputs to the dimensionless set. epsilon = epsilon1 and
/// delta = epsilon2/epsilon1; epsilon3 = q/r is reported separately and is
/// not assumed equal to epsilon2.
NondimResult nondimensionalize(const DimensionalParams& dp);

/// Flat key=value config I/O. Keys: alpha beta1 beta2 delta1 delta2 delta3
/// gamma1 gamma2 epsilon delta. '#' starts a comment.
Params parse_params(std::istream& in);
Params parse_params_file(const std::string& path);
std::string serialize_params(const Params& p);

}  // namespace triscale
