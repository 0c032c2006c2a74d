#include "triscale/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triscale/rootfind.hpp"

namespace triscale {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(FoldCase c) {
    switch (c) {
        case FoldCase::Case1: return "Case1";
        case FoldCase::Case2i: return "Case2i";
        case FoldCase::Case2ii: return "Case2ii";
        case FoldCase::Case3: return "Case3";
    }
    return "?";
}

const char* to_string(FoldBranch b) {
    switch (b) {
        case FoldBranch::Fminus: return "F-";
        case FoldBranch::F0: return "F0";
        case FoldBranch::Fplus: return "F+";
    }
    return "?";
}

const char* to_string(SuperslowBranch b) {
    switch (b) {
        case SuperslowBranch::Minus: return "-";
        case SuperslowBranch::Zero: return "0";
        case SuperslowBranch::Plus: return "+";
    }
    return "?";
}

double fold_x_d(const Params& p) {
    const double B = p.beta2;
    return (B + std::sqrt(B * B + p.beta1 * p.beta1 * B)) / p.beta1;
}

namespace {

// Samples one fold arc over [lo, hi], keeping positive-octant points, and
// tracks the worst defining-equation residual.
FoldArc sample_arc(FoldBranch label, double lo, double hi, const Params& p,
                   int n, double& max_residual) {
    FoldArc arc;
    arc.label = label;
    arc.x_lo = lo;
    arc.x_hi = hi;
    if (!(hi > lo)) return arc;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double z = fold_nu(x, p);
        const double y = F_surface(x, z, p);
        if (!(y >= 0.0) || !(z >= 0.0) || !std::isfinite(y) || !std::isfinite(z)) continue;
        arc.pts.push_back({x, y, z});
        const Partials d = partials({x, y, z}, p);
        max_residual = std::max({max_residual,
                                 std::abs(phi(x, y, z, p)), std::abs(d.phi_x)});
    }
    return arc;
}

}  // namespace

FoldCurve fold_parametrization(const Params& p, int samples_per_arc) {
    FoldCurve fc;
    fc.x_d = fold_x_d(p);
    fc.x_half = 0.5 * (1.0 - p.beta1);
    fc.x1 = std::min(fc.x_half, fc.x_d);
    fc.x2 = std::max(fc.x_half, fc.x_d);
    fc.x_m = kNaN;
    fc.x_M = kNaN;

    const double edge = 1e-9;
    auto nu = [&p](double x) { return fold_nu(x, p); };
    auto mu = [&p](double x) { return fold_mu(x, p); };

    RootConfig rc;
    rc.grid_n = 8000;

    const bool half_first = fc.x_half <= fc.x_d;
    if (half_first) {
        fc.extrema = find_extrema(nu, edge, fc.x1 - edge, rc);
        const size_t ne = fc.extrema.size();
        // borderline: extremum within 1e-6 of the domain edge
        for (double e : fc.extrema)
            if (e < 1e-6 || fc.x1 - e < 1e-6) fc.degenerate = true;
        if (ne == 0) {
            fc.case_label = FoldCase::Case1;
            fc.branches.push_back(
                sample_arc(FoldBranch::Fminus, edge, fc.x1, p, 3 * samples_per_arc,
                           fc.max_residual));
        } else if (ne == 2) {
            fc.x_m = fc.extrema[0];
            fc.x_M = fc.extrema[1];
            fc.mu_roots = find_roots(mu, edge, fc.x1 - edge, rc);
            if (fc.mu_roots.empty()) {
                // a repeated root has no sign change; probe the minimum of mu
                const double xm = fc.x_m;
                if (mu(xm) <= 1e-10) {
                    fc.mu_roots = {xm, xm};
                    fc.degenerate = true;
                }
            }
            if (fc.mu_roots.empty()) {
                fc.case_label = FoldCase::Case2i;
                fc.branches.push_back(sample_arc(FoldBranch::Fminus, edge, fc.x_m, p,
                                                 samples_per_arc, fc.max_residual));
                fc.branches.push_back(sample_arc(FoldBranch::F0, fc.x_m, fc.x_M, p,
                                                 samples_per_arc, fc.max_residual));
                fc.branches.push_back(sample_arc(FoldBranch::Fplus, fc.x_M, fc.x1, p,
                                                 samples_per_arc, fc.max_residual));
            } else {
                fc.case_label = FoldCase::Case2ii;
                if (fc.mu_roots.size() == 1) fc.degenerate = true;
                const double m1 = fc.mu_roots.front();
                const double m2 = fc.mu_roots.back();
                if (std::abs(m2 - m1) < 1e-6) fc.degenerate = true;
                fc.branches.push_back(sample_arc(FoldBranch::Fminus, edge, fc.x_m, p,
                                                 samples_per_arc, fc.max_residual));
                fc.branches.push_back(sample_arc(FoldBranch::F0, fc.x_m, m1, p,
                                                 samples_per_arc, fc.max_residual));
                fc.branches.push_back(sample_arc(FoldBranch::Fplus, m2, fc.x1, p,
                                                 samples_per_arc, fc.max_residual));
            }
        } else {
            // off-pattern extremum count: closest consistent label, flagged
            fc.degenerate = true;
            fc.case_label = ne > 2 ? FoldCase::Case2ii : FoldCase::Case1;
            fc.branches.push_back(sample_arc(FoldBranch::Fminus, edge, fc.x1, p,
                                             3 * samples_per_arc, fc.max_residual));
        }
    } else {
        // pole inside: piecewise fold curve
        fc.extrema = find_extrema(nu, edge, fc.x_d * (1.0 - 1e-7), rc);
        if (fc.extrema.size() != 1) fc.degenerate = true;
        fc.case_label = FoldCase::Case3;
        fc.x_m = fc.extrema.empty() ? kNaN : fc.extrema.front();
        // mu roots: one in (0, x_d), one in (x2, 1)
        auto lo_roots = find_roots(mu, edge, fc.x_d * (1.0 - 1e-7), rc);
        auto hi_roots = find_roots(mu, fc.x2 * (1.0 + 1e-7), 1.0, rc);
        if (!lo_roots.empty()) fc.mu_roots.push_back(lo_roots.front());
        if (!hi_roots.empty()) fc.mu_roots.push_back(hi_roots.back());
        if (fc.mu_roots.size() == 2 && !fc.extrema.empty()) {
            const double m1 = fc.mu_roots[0];
            const double m2 = fc.mu_roots[1];
            fc.branches.push_back(sample_arc(FoldBranch::Fminus, edge, fc.x_m, p,
                                             samples_per_arc, fc.max_residual));
            fc.branches.push_back(sample_arc(FoldBranch::F0, fc.x_m, m1, p,
                                             samples_per_arc, fc.max_residual));
            fc.branches.push_back(sample_arc(FoldBranch::Fplus, fc.x2 * (1.0 + 1e-7), m2,
                                             p, samples_per_arc, fc.max_residual));
        } else {
            fc.degenerate = true;
        }
    }
    return fc;
}

SheetCounts sheet_structure(double y, const Params& p) {
    // cross-section of S at constant y: z(x) from phi = 0
    auto zof = [&](double x) {
        return (p.beta2 + x * x) * (1.0 - x - y / (p.beta1 + x)) / (p.alpha * x);
    };
    const int n = 20000;
    const double lo = 1e-6, hi = 1.0;
    SheetCounts out;
    int prev_sign = 0;  // 0: outside the octant
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double z = zof(x);
        if (!(z >= 0.0) || !std::isfinite(z)) {
            prev_sign = 0;
            continue;
        }
        const Partials d = partials({x, y, z}, p);
        const int s = d.phi_x < 0.0 ? -1 : 1;
        if (s != prev_sign) {
            if (s < 0)
                ++out.attracting;
            else
                ++out.repelling;
            prev_sign = s;
        }
    }
    return out;
}

Eigen::Matrix2d layer_jacobian(const State& s, const Params& p) {
    const Partials d = partials(s, p);
    const double ph = phi(s.x, s.y, s.z, p);
    const double ch = chi(s.x, s.y, p);
    Eigen::Matrix2d J;
    J(0, 0) = ph + s.x * d.phi_x;
    J(0, 1) = s.x * d.phi_y;
    J(1, 0) = p.epsilon * s.y * d.chi_x;
    J(1, 1) = p.epsilon * (ch + s.y * d.chi_y);
    return J;
}

namespace {

struct ZPoint {
    double x, y, z;
    Partials d;
};

ZPoint z_point(double x, const Params& p) {
    ZPoint q;
    q.x = x;
    q.z = superslow_G(x, p);
    q.y = F_surface(x, q.z, p);
    q.d = partials({q.x, q.y, q.z}, p);
    return q;
}

double lambda_eps(double x, const Params& p) {
    const ZPoint q = z_point(x, p);
    const double tr = x * q.d.phi_x - p.epsilon * p.gamma1 * q.y;
    const double b1x = p.beta1 + x;
    return tr * tr - 4.0 * p.epsilon * x * q.y *
           (-p.gamma1 * q.d.phi_x + p.beta1 / (b1x * b1x * b1x));
}

double z_trace(double x, const Params& p) {
    const ZPoint q = z_point(x, p);
    return x * q.d.phi_x - p.epsilon * p.gamma1 * q.y;
}

}  // namespace

LayerEigen layer_eigenvalues(double x, const Params& p) {
    const ZPoint q = z_point(x, p);
    const double tr = x * q.d.phi_x - p.epsilon * p.gamma1 * q.y;
    const double L = lambda_eps(x, p);
    LayerEigen e;
    e.Lambda = L;
    if (L >= 0.0) {
        const double s = std::sqrt(L);
        e.plus = 0.5 * (tr + s);
        e.minus = 0.5 * (tr - s);
    } else {
        const double w = 0.5 * std::sqrt(-L);
        e.plus = std::complex<double>(0.5 * tr, w);
        e.minus = std::complex<double>(0.5 * tr, -w);
    }
    return e;
}

std::vector<double> degenerate_nodes(const Params& p) {
    RootConfig rc;
    rc.grid_n = 20000;
    return find_roots([&p](double x) { return lambda_eps(x, p); }, 1e-4, 1.0, rc);
}

double hopf_delta(double x, const Params& p) {
    const ZPoint q = z_point(x, p);
    const double y = q.y;
    const auto& d = q.d;
    const double s = std::sqrt(-x * y * d.phi_y * d.chi_x);
    const double qq = 2.0 * d.phi_x + x * d.phi_xx;
    return -y * d.chi_y * s / (2.0 * y * d.chi_x * qq)
         - y * d.chi_y / (2.0 * s)
         + (3.0 * d.phi_xx + x * d.phi_xxx) * s / (2.0 * qq * qq)
         + y * d.chi_x * (d.phi_y + x * d.phi_xy) / (2.0 * qq * s);
}

std::vector<HopfPointFast> hopf_points_fast(const Params& p) {
    std::vector<HopfPointFast> out;
    RootConfig rc;
    rc.grid_n = 20000;

    // knees of Z for branch attribution
    auto G = [&p](double x) { return superslow_G(x, p); };
    auto knees = find_extrema(G, 1e-3, 1.0 - 1e-6, rc);

    for (double x : find_roots([&p](double xx) { return z_trace(xx, p); }, 1e-4, 1.0, rc)) {
        const ZPoint q = z_point(x, p);
        const double det = p.epsilon * x * q.y *
                           (q.d.phi_x * q.d.chi_y - q.d.phi_y * q.d.chi_x);
        if (det <= 0.0) continue;
        const double L = lambda_eps(x, p);
        if (L >= 0.0) continue;  // real pair: not a Hopf point
        HopfPointFast h;
        h.x = x;
        h.y = q.y;
        h.z = q.z;
        h.omega = 0.5 * std::sqrt(-L);
        h.Delta = hopf_delta(x, p);
        h.subcritical = h.Delta > 0.0;
        h.curve = SuperslowWhich::Z;
        if (knees.size() >= 2)
            h.branch = x < knees.front() ? SuperslowBranch::Minus
                     : x > knees.back() ? SuperslowBranch::Plus
                                        : SuperslowBranch::Zero;
        out.push_back(h);
    }

    // stability boundary on L (y = 0): x phi_x + eps chi = 0
    auto l_trace = [&p](double x) {
        const double z = superslow_H(x, p);
        const Partials d = partials({x, 0.0, z}, p);
        return x * d.phi_x + p.epsilon * chi(x, 0.0, p);
    };
    for (double x : find_roots(l_trace, 1e-4, 1.0 - 1e-9, rc)) {
        const double z = superslow_H(x, p);
        if (!(z >= 0.0)) continue;
        HopfPointFast h;
        h.x = x;
        h.y = 0.0;
        h.z = z;
        h.curve = SuperslowWhich::L;
        h.Delta = 0.0;
        h.subcritical = false;
        out.push_back(h);
    }
    return out;
}

SuperslowBranch SuperslowCurve::branch_of(double x) const {
    if (fold_xs.size() < 2) return SuperslowBranch::Minus;
    if (x < fold_xs.front()) return SuperslowBranch::Minus;
    if (x > fold_xs.back()) return SuperslowBranch::Plus;
    return SuperslowBranch::Zero;
}

SuperslowCurves superslow_curves(const Params& p, int samples) {
    SuperslowCurves out;
    RootConfig rc;
    rc.grid_n = 20000;

    auto build = [&](SuperslowWhich which) {
        SuperslowCurve c;
        c.which = which;
        c.x_lo = 1e-4;
        c.x_hi = 1.0;
        auto zf = [&](double x) {
            return which == SuperslowWhich::Z ? superslow_G(x, p) : superslow_H(x, p);
        };
        c.fold_xs = find_extrema(zf, 1e-3, c.x_hi - 1e-6, rc);
        c.cubic = c.fold_xs.size() == 2;
        for (int i = 0; i <= samples; ++i) {
            const double x = c.x_lo + (c.x_hi - c.x_lo) * i / samples;
            const double z = zf(x);
            if (!(z >= 0.0) || !std::isfinite(z)) continue;
            const double y = which == SuperslowWhich::Z
                                 ? std::max(0.0, y_on_z_curve(x, p))
                                 : 0.0;
            c.pts.push_back({x, y, z});
        }
        return c;
    };
    out.Z = build(SuperslowWhich::Z);
    out.L = build(SuperslowWhich::L);
    out.fold_flags_ok = out.Z.cubic && out.L.cubic;
    out.hopf = hopf_points_fast(p);
    out.degenerate_nodes = degenerate_nodes(p);
    return out;
}

}  // namespace triscale
