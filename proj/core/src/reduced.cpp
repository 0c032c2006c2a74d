#include "triscale/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triscale/ode.hpp"
#include "triscale/rootfind.hpp"

namespace triscale {

const char* to_string(FoldedKind k) {
    switch (k) {
        case FoldedKind::Node: return "folded node";
        case FoldedKind::Saddle: return "folded saddle";
        case FoldedKind::Focus: return "folded focus";
        case FoldedKind::Degenerate: return "degenerate/FSN";
    }
    return "?";
}

Eigen::Matrix2d desingularized_jacobian(double x, double z, const Params& p,
                                        DesingLimit lim) {
    using C = std::complex<double>;
    const double h = 1e-100;
    Eigen::Matrix2d J;
    auto fx = desingularized_field(C(x, h), C(z, 0.0), p, lim);
    auto fz = desingularized_field(C(x, 0.0), C(z, h), p, lim);
    J(0, 0) = fx[0].imag() / h;
    J(1, 0) = fx[1].imag() / h;
    J(0, 1) = fz[0].imag() / h;
    J(1, 1) = fz[1].imag() / h;
    return J;
}

std::vector<FoldedSingularity> folded_singularities(const Params& p) {
    std::vector<FoldedSingularity> out;
    const FoldCurve fc = fold_parametrization(p);
    RootConfig rc;
    rc.grid_n = 8000;

    auto g = [&p](double x) {
        const double z = fold_nu(x, p);
        const auto f = desingularized_field(x, z, p, DesingLimit::FiniteDelta);
        return f[0];
    };

    for (const auto& arc : fc.branches) {
        if (arc.pts.size() < 2) continue;
        const double lo = arc.pts.front()[0];
        const double hi = arc.pts.back()[0];
        for (double x : find_roots(g, lo, hi, rc)) {
            FoldedSingularity fs;
            const double z = fold_nu(x, p);
            const double y = F_surface(x, z, p);
            fs.s = {x, y, z};
            fs.branch = arc.label;
            const Partials d = partials(fs.s, p);
            fs.res_phi = std::abs(phi(x, y, z, p));
            fs.res_phi_x = std::abs(d.phi_x);
            fs.res_eq = std::abs(g(x));
            const Eigen::Matrix2d J = desingularized_jacobian(x, z, p);
            const double tr = J.trace();
            const double det = J.determinant();
            const double disc = tr * tr - 4.0 * det;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                fs.eig1 = 0.5 * (tr + s);
                fs.eig2 = 0.5 * (tr - s);
                const double l1 = fs.eig1.real(), l2 = fs.eig2.real();
                const double weak = std::abs(l1) < std::abs(l2) ? l1 : l2;
                const double strong = std::abs(l1) < std::abs(l2) ? l2 : l1;
                fs.mu_ratio = strong != 0.0 ? weak / strong : 0.0;
                if (std::abs(weak) <= 1e-6 * std::abs(strong))
                    fs.kind = FoldedKind::Degenerate;
                else if (l1 * l2 > 0.0)
                    fs.kind = FoldedKind::Node;
                else
                    fs.kind = FoldedKind::Saddle;
                if (std::abs(disc) < 1e-10) fs.kind = FoldedKind::Degenerate;
            } else {
                const double w = 0.5 * std::sqrt(-disc);
                fs.eig1 = {0.5 * tr, w};
                fs.eig2 = {0.5 * tr, -w};
                fs.kind = std::abs(disc) < 1e-10 ? FoldedKind::Degenerate
                                                 : FoldedKind::Focus;
            }
            out.push_back(fs);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const FoldedSingularity& a, const FoldedSingularity& b) {
                  return a.s.x < b.s.x;
              });
    return out;
}

namespace {

// winding number of polygon around (x, z)
bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double x,
                      double z) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a[1] > z) != (b[1] > z)) {
            const double t = (z - a[1]) / (b[1] - a[1]);
            const double xi = a[0] + t * (b[0] - a[0]);
            if (x < xi) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

bool SingularFunnel::contains(double x, double z) const {
    std::vector<std::array<double, 2>> poly = gamma;
    poly.insert(poly.end(), fold_arc.begin(), fold_arc.end());
    if (poly.size() < 3) return false;
    return point_in_polygon(poly, x, z);
}

SingularFunnel strong_canard(const FoldedSingularity& fn, const Params& p) {
    SingularFunnel fun;
    fun.node = fn;

    const Eigen::Matrix2d J = desingularized_jacobian(fn.s.x, fn.s.z, p);
    // strong eigendirection: eigenvalue of larger magnitude (real node)
    Eigen::EigenSolver<Eigen::Matrix2d> es(J);
    int is = std::abs(es.eigenvalues()(0).real()) > std::abs(es.eigenvalues()(1).real())
                 ? 0 : 1;
    Eigen::Vector2d v = es.eigenvectors().col(is).real();
    v.normalize();
    const double lam_strong = es.eigenvalues()(is).real();

    // trace the strong orbit away from the node: against the flow when the
    // node attracts (strong eigenvalue negative), with it otherwise
    OdeSystem sys;
    sys.n = 2;
    const double tdir = lam_strong < 0.0 ? -1.0 : 1.0;
    sys.rhs = [&p, tdir](const double* u, double* f) {
        auto d = desingularized_field(u[0], u[1], p, DesingLimit::FiniteDelta);
        f[0] = tdir * d[0];
        f[1] = tdir * d[1];
    };
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    opts.initial_step = 1e-6;
    opts.max_step = 0.5;

    auto trace_side = [&](double sgn) {
        std::vector<std::array<double, 2>> path;
        std::vector<double> u = {fn.s.x + sgn * 1e-6 * v(0), fn.s.z + sgn * 1e-6 * v(1)};
        path.push_back({u[0], u[1]});
        double t_guard = 0.0;
        auto on_step = [&](const OdeStepRecord& rec) {
            path.push_back({rec.u1[0], rec.u1[1]});
            t_guard = rec.t1;
            const double x = rec.u1[0], z = rec.u1[1];
            if (x < 0.0 || z < 0.0 || x > 1.5 || z > 5.0) return false;  // left the chart
            if (F_surface(x, z, p) < 0.0) return false;
            return t_guard < 400.0;
        };
        OdeResult r = integrate_ode(sys, u, 0.0, 400.0, opts, on_step);
        if (!r.ok) fun.truncated = true;
        return path;
    };

    auto side_a = trace_side(+1.0);
    auto side_b = trace_side(-1.0);

    // funnel lies between gamma and the fold branch through fn: pick the side
    // of gamma that stays on S^a (phi_x < 0) and is adjacent to the branch.
    // Use the side whose far end is farther from the fold branch start.
    std::reverse(side_a.begin(), side_a.end());  // far end -> node
    fun.gamma = side_a;
    fun.gamma.insert(fun.gamma.end(), side_b.begin(), side_b.end());

    const FoldCurve fc = fold_parametrization(p);
    for (const auto& arc : fc.branches) {
        if (arc.label != fn.branch) continue;
        for (const auto& q : arc.pts) fun.fold_arc.push_back({q[0], q[2]});
    }
    // orient fold arc from the node outward: start at closest point to node
    if (!fun.fold_arc.empty()) {
        size_t k0 = 0;
        double best = 1e300;
        for (size_t k = 0; k < fun.fold_arc.size(); ++k) {
            const double dx = fun.fold_arc[k][0] - fn.s.x;
            const double dz = fun.fold_arc[k][1] - fn.s.z;
            const double d2 = dx * dx + dz * dz;
            if (d2 < best) {
                best = d2;
                k0 = k;
            }
        }
        std::vector<std::array<double, 2>> arc(fun.fold_arc.begin() + k0,
                                               fun.fold_arc.end());
        fun.fold_arc = arc;
    }
    return fun;
}

PlaneFlowResult plane_flow(double y0, double z0, const Params& p, double t_end) {
    PlaneFlowResult out;
    OdeSystem sys;
    sys.n = 2;
    sys.rhs = [&p](const double* u, double* f) {
        f[0] = u[0] * chi(0.0, u[0], p);
        f[1] = p.delta * u[1] * psi(0.0, u[1], p);
    };
    OdeOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    opts.initial_step = 1e-6;
    opts.max_step = t_end / 200.0;

    std::vector<double> u = {y0, z0};
    out.t.push_back(0.0);
    out.y.push_back(y0);
    out.z.push_back(z0);

    double I = 0.0;  // accumulated instability integral of phi(0, y, z)
    double prev_t = 0.0, prev_phi = phi(0.0, y0, z0, p);
    bool beyond_tc = y0 <= p.beta1;
    if (beyond_tc) out.t_tc = 0.0;

    auto on_step = [&](const OdeStepRecord& rec) {
        out.t.push_back(rec.t1);
        out.y.push_back(rec.u1[0]);
        out.z.push_back(rec.u1[1]);
        const double ph = phi(0.0, rec.u1[0], rec.u1[1], p);
        const double Inew = I + 0.5 * (prev_phi + ph) * (rec.t1 - prev_t);
        if (!beyond_tc && rec.u1[0] <= p.beta1) {
            beyond_tc = true;
            out.t_tc = rec.t1;
        }
        if (beyond_tc && I < 0.0 && Inew >= 0.0) {
            // linear interpolation of the zero of I
            const double frac = -I / (Inew - I);
            out.t_exit = prev_t + frac * (rec.t1 - prev_t);
            std::array<double, 2> uu;
            rec.eval(out.t_exit, uu.data());
            out.y_exit = uu[0];
            out.z_exit = uu[1];
            out.exit_found = true;
            return false;
        }
        I = Inew;
        prev_t = rec.t1;
        prev_phi = ph;
        return true;
    };
    integrate_ode(sys, u, 0.0, t_end, opts, on_step);
    return out;
}

DelayedHopfResult delayed_hopf_exit(double x_entry, const Params& p) {
    DelayedHopfResult out;
    out.x_entry = x_entry;

    // locate the Hopf point on the same side of the Z curve
    auto hopf = hopf_points_fast(p);
    double x_h = -1.0;
    double best = 1e300;
    for (const auto& h : hopf) {
        if (h.curve != SuperslowWhich::Z) continue;
        const double d = std::abs(h.x - x_entry);
        if (d < best) {
            best = d;
            x_h = h.x;
        }
    }
    if (x_h < 0.0) return out;
    out.x_hopf = x_h;
    if (x_entry == x_h) {  // degenerate entry: zero accumulated contraction
        out.x_exit = x_h;
        out.z_exit = superslow_G(x_h, p);
        out.found = true;
        return out;
    }

    // slow time along Z: dtau = G'(x)/(G(x) psi(x, G(x))) dx
    auto weight = [&p](double x) {
        const double Gp = complex_step(
            [&p](std::complex<double> xx) { return superslow_G(xx, p); }, x);
        const double z = superslow_G(x, p);
        const double ps = psi(x, z, p);
        return Gp / (z * ps);
    };
    auto re_lambda = [&p](double x) {
        const LayerEigen e = layer_eigenvalues(x, p);
        return 0.5 * (e.plus.real() + e.minus.real());
    };

    const double dir = x_h > x_entry ? 1.0 : -1.0;
    const int n_per_unit = 40000;
    double A = 0.0;
    double x = x_entry;
    const double dx = dir / n_per_unit;
    double prev = re_lambda(x) * weight(x);
    bool past_hopf = false;
    for (int i = 0; i < 4 * n_per_unit; ++i) {
        const double xn = x + dx;
        if (xn <= 1e-4 || xn >= 1.0) break;
        const double cur = re_lambda(xn) * weight(xn);
        const double An = A + 0.5 * (prev + cur) * dx;
        if (!past_hopf && ((dir > 0 && xn >= x_h) || (dir < 0 && xn <= x_h)))
            past_hopf = true;
        if (past_hopf && A < 0.0 && An >= 0.0) {
            const double frac = -A / (An - A);
            out.x_exit = x + frac * dx;
            out.z_exit = superslow_G(out.x_exit, p);
            out.found = true;
            return out;
        }
        A = An;
        x = xn;
        prev = cur;
    }
    return out;
}

Fsn2Curves fsn2_curves(const Params& base, double beta2_lo, double beta2_hi,
                       double alpha_lo, double alpha_hi, int n_beta2, int n_alpha) {
    Fsn2Curves out;
    (void)n_beta2;

    // per-alpha slice: locate the beta2 values where an ordinary singularity
    // (E* on Z for curve b, E_xz on L for curve a) crosses the fold phi_x = 0.
    // For each x, psi = 0 pins beta2(x); the fold residual along that slice
    // is a 1-D function of x whose roots are bisected.
    auto slice = [&](bool coexistent, double alpha,
                     std::vector<std::array<double, 2>>& curve) {
        Params p0 = base;
        p0.alpha = alpha;
        const double x_tc = p0.delta1 * p0.beta1 / (1.0 - p0.delta1);
        const double x_lo = coexistent ? x_tc + 1e-5 : 1e-4;

        auto zof = [&](double x, const Params& p) {
            return coexistent ? superslow_G(x, p) : superslow_H(x, p);
        };
        // beta2 roots of psi(x, z(x; beta2)) = 0 for fixed x
        auto beta2_at = [&](double x) {
            std::vector<double> roots;
            Params p = p0;
            auto g = [&](double b2) {
                p.beta2 = b2;
                return psi(x, zof(x, p), p);
            };
            RootConfig rc;
            rc.grid_n = 400;
            for (double b2 : find_roots(g, beta2_lo, beta2_hi, rc)) {
                p.beta2 = b2;
                if (zof(x, p) > 0.0) roots.push_back(b2);
            }
            return roots;
        };
        auto fold_res = [&](double x, double b2) {
            Params p = p0;
            p.beta2 = b2;
            const double z = zof(x, p);
            const double y = coexistent ? std::max(0.0, y_on_z_curve(x, p)) : 0.0;
            return partials({x, y, z}, p).phi_x;
        };

        const int nx = 240;
        double prev_x = 0.0;
        std::vector<std::pair<double, double>> prev;  // (beta2, residual)
        for (int i = 0; i <= nx; ++i) {
            const double x = x_lo + (0.95 - x_lo) * i / nx;
            std::vector<std::pair<double, double>> cur;
            for (double b2 : beta2_at(x)) cur.push_back({b2, fold_res(x, b2)});
            for (const auto& [b2, res] : cur) {
                for (const auto& [pb2, pres] : prev) {
                    if (std::abs(pb2 - b2) > 0.1 * (beta2_hi - beta2_lo)) continue;
                    if ((pres > 0) == (res > 0)) continue;
                    // bisect the fold residual in x along the slice
                    double lo = prev_x, hi = x, flo = pres;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const auto cands = beta2_at(mid);
                        double bmid = b2;
                        double bestd = 1e300;
                        for (double bb : cands) {
                            if (std::abs(bb - b2) < bestd) {
                                bestd = std::abs(bb - b2);
                                bmid = bb;
                            }
                        }
                        const double fmid = fold_res(mid, bmid);
                        if ((fmid > 0) == (flo > 0)) {
                            lo = mid;
                            flo = fmid;
                        } else {
                            hi = mid;
                        }
                    }
                    const double xr = 0.5 * (lo + hi);
                    double bfinal = b2, bestd = 1e300;
                    for (double bb : beta2_at(xr)) {
                        if (std::abs(bb - b2) < bestd) {
                            bestd = std::abs(bb - b2);
                            bfinal = bb;
                        }
                    }
                    curve.push_back({bfinal, alpha});
                }
            }
            prev = cur;
            prev_x = x;
        }
    };

    for (int j = 0; j <= n_alpha; ++j) {
        const double alpha = alpha_lo + (alpha_hi - alpha_lo) * j / n_alpha;
        if (alpha <= 0.0 || alpha > 1.0) continue;
        slice(false, alpha, out.a);
        slice(true, alpha, out.b);
    }
    return out;
}

}  // namespace triscale
