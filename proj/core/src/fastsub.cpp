#include "triscale/fastsub.hpp"

#include <algorithm>
#include <cmath>

#include "triscale/ode.hpp"
#include "triscale/rootfind.hpp"

namespace triscale {

namespace {

// planar layer problem (x, y) in fast time at frozen z
struct LayerFlow {
    const Params& p;
    double z;

    void rhs(const double* u, double* f) const {
        f[0] = u[0] * phi(u[0], u[1], z, p);
        f[1] = p.epsilon * u[1] * chi(u[0], u[1], p);
    }
    Eigen::Matrix2d jac(const double* u) const {
        return layer_jacobian({u[0], u[1], z}, p);
    }
};

// integrate planar state (+ optional 2x2 variational block)
bool layer_flow(const Params& p, double z, Eigen::Vector2d& u, double T,
                Eigen::Matrix2d* M = nullptr, double rtol = 1e-9,
                std::vector<std::array<double, 2>>* path = nullptr) {
    OdeSystem sys;
    const bool var = M != nullptr;
    sys.n = var ? 6 : 2;
    sys.rhs = [&p, z, var](const double* u_, double* f) {
        const double x = u_[0], y = u_[1];
        f[0] = x * phi(x, y, z, p);
        f[1] = p.epsilon * y * chi(x, y, p);
        if (var) {
            const Eigen::Matrix2d J = layer_jacobian({x, y, z}, p);
            Eigen::Map<const Eigen::Matrix2d> V(u_ + 2);
            Eigen::Map<Eigen::Matrix2d> dV(f + 2);
            dV = J * V;
        }
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = rtol * 1e-2;
    opts.initial_step = 1e-4;
    std::vector<double> w(sys.n, 0.0);
    w[0] = u(0);
    w[1] = u(1);
    if (var) w[2] = w[5] = 1.0;
    auto on_step = [&](const OdeStepRecord& rec) {
        if (path) path->push_back({rec.u1[0], rec.u1[1]});
        return true;
    };
    OdeResult r = integrate_ode(sys, w, 0.0, T, opts,
                                path ? std::function<bool(const OdeStepRecord&)>(on_step)
                                     : std::function<bool(const OdeStepRecord&)>());
    u = {w[0], w[1]};
    if (var) *M = Eigen::Map<Eigen::Matrix2d>(w.data() + 2);
    return r.ok;
}

struct PlanarCycle {
    Eigen::Vector2d u0;
    double T = 0.0;
    double z = 0.0;
    double mult = 0.0;  // nontrivial multiplier = det(M)
    bool valid = false;
};

// Newton shooting for a planar cycle at fixed z with phase anchor y0 fixed.
bool planar_newton(const Params& p, double z, Eigen::Vector2d& u0, double& T,
                   double anchor_y, double tol = 1e-9, int max_iter = 9) {
    Eigen::Vector3d U(u0(0), u0(1), T);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::Vector2d u = {U(0), U(1)};
        Eigen::Matrix2d M;
        if (!layer_flow(p, z, u, U(2), &M)) return false;
        double f[2];
        LayerFlow lf{p, z};
        double w[2] = {u(0), u(1)};
        lf.rhs(w, f);
        Eigen::Vector3d R(u(0) - U(0), u(1) - U(1), U(1) - anchor_y);
        if (R.norm() < tol) break;
        Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
        J.block<2, 2>(0, 0) = M - Eigen::Matrix2d::Identity();
        J(0, 2) = f[0];
        J(1, 2) = f[1];
        J(2, 1) = 1.0;
        Eigen::Vector3d d = J.partialPivLu().solve(-R);
        if (!d.allFinite()) return false;
        U += d;
        if (U(2) <= 0) return false;
    }
    u0 = {U(0), U(1)};
    T = U(2);
    Eigen::Vector2d u = u0;
    Eigen::Matrix2d M;
    if (!layer_flow(p, z, u, T, &M)) return false;
    return (u - u0).norm() < 100 * tol;
}

// equilibria of the layer problem at fixed z: x-values on Z (G(x)=z) and on
// L (H(x)=z), plus the origin branch K.
struct LayerEq {
    double x, y;
    bool saddle;
    bool stable;
};

std::vector<LayerEq> layer_equilibria(const Params& p, double z) {
    std::vector<LayerEq> out;
    RootConfig rc;
    rc.grid_n = 6000;
    const double x_tc = p.delta1 * p.beta1 / (1.0 - p.delta1);
    for (double x :
         find_roots([&](double xx) { return superslow_G(xx, p) - z; }, x_tc + 1e-7, 1.0, rc)) {
        const double y = y_on_z_curve(x, p);
        Eigen::Matrix2d J = layer_jacobian({x, y, z}, p);
        const double det = J.determinant(), tr = J.trace();
        out.push_back({x, y, det < 0.0, det > 0.0 && tr < 0.0});
    }
    for (double x :
         find_roots([&](double xx) { return superslow_H(xx, p) - z; }, 1e-5, 1.0, rc)) {
        Eigen::Matrix2d J = layer_jacobian({x, 0.0, z}, p);
        const double det = J.determinant(), tr = J.trace();
        out.push_back({x, 0.0, det < 0.0, det > 0.0 && tr < 0.0});
    }
    return out;
}

int count_enclosed_nonsaddle(const Params& p, double z,
                             const std::vector<std::array<double, 2>>& orbit) {
    if (orbit.size() < 8) return 0;
    auto inside = [&](double x, double y) {
        bool in = false;
        const size_t n = orbit.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const auto& a = orbit[i];
            const auto& b = orbit[j];
            if ((a[1] > y) != (b[1] > y)) {
                const double t = (y - a[1]) / (b[1] - a[1]);
                if (x < a[0] + t * (b[0] - a[0])) in = !in;
            }
        }
        return in;
    };
    int cnt = 0;
    for (const auto& e : layer_equilibria(p, z))
        if (!e.saddle && inside(e.x, e.y)) ++cnt;
    return cnt;
}

// continue a planar cycle branch in z from a Hopf point by natural-parameter
// stepping with fold handling via step reversal detection
LayerCycleBranch continue_layer_cycle(const Params& p, const HopfPointFast& h,
                                      double z_lo, double z_hi, double period_cap) {
    LayerCycleBranch br;
    br.z_hopf = h.z;

    // subcritical side: the side where the equilibrium is stable (trace < 0)
    auto trace_at = [&](double z) {
        // nearest Z-branch equilibrium to the Hopf x
        double best = 1e300;
        double tr = 0.0;
        for (const auto& e : layer_equilibria(p, z)) {
            const double d = std::abs(e.x - h.x);
            if (d < best && e.y > 0.0) {
                best = d;
                tr = layer_jacobian({e.x, e.y, z}, p).trace();
            }
        }
        return tr;
    };
    const double dz0 = 2e-5 * std::max(1.0, std::abs(h.z));
    double dir = trace_at(h.z + dz0) < 0.0 ? +1.0 : -1.0;

    // seed: reverse-time settling onto the unstable cycle
    double z = h.z + dir * 10.0 * dz0;
    PlanarCycle cyc;
    {
        // start near the (stable) equilibrium, kicked outward; integrate
        // BACKWARD (unstable planar cycle attracts in reverse time)
        double xe = h.x, ye = h.y;
        for (const auto& e : layer_equilibria(p, z))
            if (std::abs(e.x - h.x) < 0.05 && e.y > 0) {
                xe = e.x;
                ye = e.y;
            }
        OdeSystem sys;
        sys.n = 2;
        sys.rhs = [&p, z](const double* u, double* f) {
            f[0] = -u[0] * phi(u[0], u[1], z, p);
            f[1] = -p.epsilon * u[1] * chi(u[0], u[1], p);
        };
        OdeOptions opts;
        opts.rtol = 1e-10;
        opts.atol = 1e-12;
        opts.initial_step = 1e-4;
        std::vector<double> u = {xe * 1.001, ye * 1.001};
        // settle, then take a return map through y = ye upward
        if (!integrate_ode(sys, u, 0.0, 2000.0, opts).ok) return br;
        std::vector<double> cross_t;
        Eigen::Vector2d anchor(u[0], u[1]);
        double prev_y = u[1];
        double t_acc = 0.0;
        std::vector<double> uu = u;
        double period_est = 0.0;
        auto on_step = [&](const OdeStepRecord& rec) {
            if (rec.u0[1] < ye && rec.u1[1] >= ye) {
                cross_t.push_back(rec.t1);
                anchor = {rec.u1[0], rec.u1[1]};
                if (cross_t.size() >= 3) return false;
            }
            (void)prev_y;
            (void)t_acc;
            return true;
        };
        integrate_ode(sys, uu, 0.0, 3000.0, opts, on_step);
        if (cross_t.size() < 2) return br;
        period_est = cross_t.back() - cross_t[cross_t.size() - 2];
        cyc.u0 = anchor;
        cyc.T = period_est;
        cyc.z = z;
        if (!planar_newton(p, z, cyc.u0, cyc.T, cyc.u0(1))) return br;
        cyc.valid = true;
    }

    double dz = dir * 10.0 * dz0;
    double prev_mult_gap = 0.0;
    int folds = 0;
    double work = 0.0;  // accumulated integration time (fast units)
    for (int k = 0; k < 800 && cyc.valid && work < 2e5; ++k) {
        work += 3.0 * cyc.T;
        // record current
        Eigen::Vector2d u = cyc.u0;
        Eigen::Matrix2d M;
        std::vector<std::array<double, 2>> path;
        if (!layer_flow(p, cyc.z, u, cyc.T, &M, 1e-9, &path)) break;
        LayerCyclePoint pt;
        pt.z = cyc.z;
        pt.period = cyc.T;
        pt.mult = M.determinant();
        pt.stable = std::abs(pt.mult) < 1.0;
        pt.x_min = 1e300;
        pt.x_max = -1e300;
        for (auto& q : path) {
            pt.x_min = std::min(pt.x_min, q[0]);
            pt.x_max = std::max(pt.x_max, q[0]);
        }
        br.points.push_back(pt);
        br.z_end = cyc.z;

        if (cyc.T > period_cap) {
            br.homoclinic_end = true;
            br.enclosed_at_end = count_enclosed_nonsaddle(p, cyc.z, path);
            break;
        }
        // SN_p: multiplier crosses +1
        const double gap = pt.mult - 1.0;
        if (k > 0 && (gap > 0) != (prev_mult_gap > 0)) {
            br.snp_z.push_back(cyc.z);
            ++folds;
        }
        prev_mult_gap = gap;

        // step in z with fold handling: on corrector failure, halve; if the
        // step underflows, reverse direction (branch fold in z)
        PlanarCycle next = cyc;
        bool moved = false;
        for (int trial = 0; trial < 7 && std::abs(dz) > 1e-12; ++trial) {
            next = cyc;
            next.z = cyc.z + dz;
            if (next.z < z_lo || next.z > z_hi) break;
            if (planar_newton(p, next.z, next.u0, next.T, next.u0(1)) &&
                std::abs(next.T - cyc.T) < 0.6 * cyc.T + 50.0) {
                moved = true;
                break;
            }
            dz *= 0.5;
        }
        if (!moved) {
            if (folds < 4) {
                dz = -dir * 10.0 * dz0;  // reverse through the fold
                dir = -dir;
                br.snp_z.push_back(cyc.z);
                ++folds;
                continue;
            }
            break;
        }
        cyc = next;
        dz = std::clamp(dz * 1.8, -5e-3, 5e-3);
        if (cyc.z < z_lo || cyc.z > z_hi) break;
    }
    return br;
}

}  // namespace

FastSubsystemDiagram fast_subsystem_diagram(const Params& p, double z_lo, double z_hi,
                                            bool continue_cycles) {
    FastSubsystemDiagram out;
    const SuperslowCurves sc = superslow_curves(p);

    auto add_branch = [&](const SuperslowCurve& c) {
        for (const auto& q : c.pts) {
            if (q[2] < z_lo || q[2] > z_hi) continue;
            LayerEqPoint e;
            e.x = q[0];
            e.y = q[1];
            e.z = q[2];
            Eigen::Matrix2d J = layer_jacobian({e.x, e.y, e.z}, p);
            Eigen::EigenSolver<Eigen::Matrix2d> es(J);
            e.eig1 = es.eigenvalues()(0);
            e.eig2 = es.eigenvalues()(1);
            e.stable = e.eig1.real() < 0.0 && e.eig2.real() < 0.0;
            e.curve = c.which;
            e.branch = c.branch_of(e.x);
            out.equilibria.push_back(e);
        }
    };
    add_branch(sc.Z);
    add_branch(sc.L);
    out.hopf = sc.hopf;

    if (continue_cycles) {
        for (const auto& h : sc.hopf) {
            if (h.curve != SuperslowWhich::Z) continue;
            if (h.z < z_lo || h.z > z_hi) continue;
            out.cycles.push_back(continue_layer_cycle(p, h, z_lo, z_hi, 2e3));
        }
    }

    // bistability: z where a stable equilibrium and a stable cycle coexist
    for (const auto& cb : out.cycles) {
        double lo = 1e300, hi = -1e300;
        for (const auto& pt : cb.points) {
            if (!pt.stable) continue;
            bool eq_stable = false;
            for (const auto& e : layer_equilibria(p, pt.z))
                if (e.stable) eq_stable = true;
            if (eq_stable) {
                lo = std::min(lo, pt.z);
                hi = std::max(hi, pt.z);
            }
        }
        if (hi >= lo) out.bistable_z.push_back({lo, hi});
    }
    return out;
}

FastSubsystemTwoPar fast_subsystem_2par(const Params& p, const TwoParConfig& cfg) {
    FastSubsystemTwoPar out;
    const double x_tc = p.delta1 * p.beta1 / (1.0 - p.delta1);

    // G(x; beta2) = (beta2 + x^2) W(x), so the knee condition G' = 0 is linear
    // in beta2; same for H with V(x).
    auto Wz = [&](double x) {
        const double y = y_on_z_curve(x, p);
        return (1.0 - x - y / (p.beta1 + x)) / (p.alpha * x);
    };
    auto Vl = [&](double x) { return (1.0 - x) / (p.alpha * x); };
    auto dfdx = [](const std::function<double(double)>& f, double x) {
        const double h = 1e-7;
        return (f(x + h) - f(x - h)) / (2.0 * h);
    };
    auto snf_beta2 = [&](double x, bool on_z) {
        const auto f = on_z ? std::function<double(double)>(Wz)
                            : std::function<double(double)>(Vl);
        const double W = f(x), Wp = dfdx(f, x);
        if (Wp == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return -(x * x * Wp + 2.0 * x * W) / Wp;
    };

    // SN_f curve on the coexistence branch, with cusp where beta2*(x) folds
    {
        std::vector<double> b2s;
        std::vector<double> xs;
        const double lo = x_tc + 1e-4, hi = 0.98;
        for (int i = 0; i <= cfg.n_x; ++i) {
            const double x = lo + (hi - lo) * i / cfg.n_x;
            const double b2 = snf_beta2(x, true);
            if (!std::isfinite(b2) || b2 < cfg.beta2_lo || b2 > cfg.beta2_hi) continue;
            Params q = p;
            q.beta2 = b2;
            const double z = superslow_G(x, q);
            if (!(z > 0.0) || !std::isfinite(z)) continue;
            out.snf.push_back({z, b2, x, 0});
            if (b2 <= 0.0) out.nonphysical.push_back({z, b2, x, 0});
            xs.push_back(x);
            b2s.push_back(b2);
        }
        for (size_t i = 1; i + 1 < b2s.size(); ++i) {
            if ((b2s[i] - b2s[i - 1]) * (b2s[i + 1] - b2s[i]) < 0.0) {
                BifPoint c;
                c.kind = BifKind::Cusp;
                Params q = p;
                q.beta2 = b2s[i];
                c.par1 = superslow_G(xs[i], q);
                c.par2 = b2s[i];
                c.s = {xs[i], std::max(0.0, y_on_z_curve(xs[i], p)), c.par1};
                out.cusp.push_back(c);
            }
        }
        // fold curve of the y=0 branch
        for (int i = 0; i <= cfg.n_x; ++i) {
            const double x = 1e-3 + (0.98 - 1e-3) * i / cfg.n_x;
            const double b2 = snf_beta2(x, false);
            if (!std::isfinite(b2) || b2 < cfg.beta2_lo || b2 > cfg.beta2_hi) continue;
            Params q = p;
            q.beta2 = b2;
            const double z = superslow_H(x, q);
            if (!(z > 0.0) || !std::isfinite(z)) continue;
            out.snf.push_back({z, b2, x, 1});
            if (b2 <= 0.0) out.nonphysical.push_back({z, b2, x, 1});
        }
    }

    // Hopf curve: trace(x; beta2) = 0 solved for beta2 along an x grid
    auto trace_xb = [&](double x, double b2) {
        Params q = p;
        q.beta2 = b2;
        const double z = superslow_G(x, q);
        const double y = F_surface(x, z, q);
        return x * partials({x, y, z}, q).phi_x - q.epsilon * q.gamma1 * y;
    };
    auto det_xb = [&](double x, double b2) {
        Params q = p;
        q.beta2 = b2;
        const double z = superslow_G(x, q);
        const double y = F_surface(x, z, q);
        const Partials d = partials({x, y, z}, q);
        return d.phi_x * d.chi_y - d.phi_y * d.chi_x;
    };
    {
        RootConfig rc;
        rc.grid_n = 1200;
        const double lo = x_tc + 1e-4, hi = 0.98;
        std::vector<std::pair<double, double>> pts;  // (x, beta2)
        for (int i = 0; i <= cfg.n_x; ++i) {
            const double x = lo + (hi - lo) * i / cfg.n_x;
            for (double b2 : find_roots([&](double b) { return trace_xb(x, b); },
                                        cfg.beta2_lo, cfg.beta2_hi, rc)) {
                pts.push_back({x, b2});
            }
        }
        std::sort(pts.begin(), pts.end());
        for (const auto& [x, b2] : pts) {
            Params q = p;
            q.beta2 = b2;
            const double z = superslow_G(x, q);
            if (!(z > 0.0) || !std::isfinite(z)) continue;
            out.hopf.push_back({z, b2, x, 0});
            out.hopf_delta.push_back(hopf_delta(x, q));
            if (b2 <= 0.0) out.nonphysical.push_back({z, b2, x, 0});
        }

        // chain points into connected curve branches before scanning for
        // criticality sign changes (several beta2 roots coexist per x)
        const size_t n = out.hopf.size();
        std::vector<bool> used(n, false);
        const double dx_link = 4.0 * (hi - lo) / cfg.n_x;
        for (size_t s0 = 0; s0 < n; ++s0) {
            if (used[s0]) continue;
            std::vector<size_t> chain = {s0};
            used[s0] = true;
            for (;;) {
                const auto& tail = out.hopf[chain.back()];
                double best = 1e300;
                size_t who = n;
                for (size_t j = 0; j < n; ++j) {
                    if (used[j]) continue;
                    const double ddx = out.hopf[j].x - tail.x;
                    if (ddx < 0 || ddx > dx_link) continue;
                    const double ddb = (out.hopf[j].beta2 - tail.beta2) / 0.02;
                    const double d2 = ddx * ddx + ddb * ddb * dx_link * dx_link;
                    if (d2 < best) {
                        best = d2;
                        who = j;
                    }
                }
                if (who == n || std::abs(out.hopf[who].beta2 - tail.beta2) > 0.01)
                    break;
                used[who] = true;
                chain.push_back(who);
            }
            for (size_t k = 1; k < chain.size(); ++k) {
                const double d0 = out.hopf_delta[chain[k - 1]];
                const double d1 = out.hopf_delta[chain[k]];
                const auto& hp = out.hopf[chain[k]];
                Params q = p;
                q.beta2 = hp.beta2;
                if ((d0 > 0) != (d1 > 0) && det_xb(hp.x, hp.beta2) > 0.0 &&
                    std::isfinite(d0) && std::isfinite(d1)) {
                    BifPoint g;
                    g.kind = BifKind::GeneralizedHopf;
                    g.par1 = hp.z;
                    g.par2 = hp.beta2;
                    g.s = {hp.x, std::max(0.0, y_on_z_curve(hp.x, p)), hp.z};
                    g.diagnostic = d1;
                    out.gh.push_back(g);
                }
            }
        }

        // self-intersection: two x with equal (z, beta2)
        for (size_t i = 0; i + 1 < out.hopf.size() && !out.hopf_self_intersects; ++i) {
            for (size_t j = i + 1; j < out.hopf.size(); ++j) {
                if (std::abs(out.hopf[i].x - out.hopf[j].x) < 0.02) continue;
                const double dzc = out.hopf[i].z - out.hopf[j].z;
                const double dbc = out.hopf[i].beta2 - out.hopf[j].beta2;
                if (std::abs(dzc) < 2e-3 && std::abs(dbc) < 2e-3) {
                    // refine: T(x1,b)=0, T(x2,b)=0, G(x1,b)=G(x2,b)
                    Eigen::Vector3d X(out.hopf[i].x, out.hopf[j].x,
                                      0.5 * (out.hopf[i].beta2 + out.hopf[j].beta2));
                    for (int it = 0; it < 40; ++it) {
                        auto Gx = [&](double x, double b) {
                            Params q = p;
                            q.beta2 = b;
                            return superslow_G(x, q);
                        };
                        Eigen::Vector3d R(trace_xb(X(0), X(2)), trace_xb(X(1), X(2)),
                                          Gx(X(0), X(2)) - Gx(X(1), X(2)));
                        if (R.norm() < 1e-12) break;
                        Eigen::Matrix3d Jm;
                        const double h = 1e-8;
                        for (int c = 0; c < 3; ++c) {
                            Eigen::Vector3d Xp = X, Xm = X;
                            Xp(c) += h;
                            Xm(c) -= h;
                            Eigen::Vector3d Rp(trace_xb(Xp(0), Xp(2)),
                                               trace_xb(Xp(1), Xp(2)),
                                               Gx(Xp(0), Xp(2)) - Gx(Xp(1), Xp(2)));
                            Eigen::Vector3d Rm(trace_xb(Xm(0), Xm(2)),
                                               trace_xb(Xm(1), Xm(2)),
                                               Gx(Xm(0), Xm(2)) - Gx(Xm(1), Xm(2)));
                            Jm.col(c) = (Rp - Rm) / (2.0 * h);
                        }
                        Eigen::Vector3d d = Jm.partialPivLu().solve(-R);
                        if (!d.allFinite()) break;
                        X += d;
                    }
                    Params q = p;
                    q.beta2 = X(2);
                    const double zi = superslow_G(X(0), q);
                    if (std::isfinite(zi)) {
                        out.hopf_self_intersects = true;
                        out.self_intersection = {zi, X(2)};
                    }
                    break;
                }
            }
        }
    }

    // Bogdanov-Takens: trace = det = 0
    {
        // coexistence branch: 2-D Newton from coarse-scan seeds
        std::vector<std::array<double, 2>> seeds;
        const int nx = 160, nb = 220;
        std::vector<std::vector<double>> Tg(nx + 1), Dg(nx + 1);
        for (int i = 0; i <= nx; ++i) {
            const double x = x_tc + 1e-4 + (0.95 - x_tc) * i / nx;
            Tg[i].resize(nb + 1);
            Dg[i].resize(nb + 1);
            for (int j = 0; j <= nb; ++j) {
                const double b2 = cfg.beta2_lo + (cfg.beta2_hi - cfg.beta2_lo) * j / nb;
                Tg[i][j] = trace_xb(x, b2);
                Dg[i][j] = det_xb(x, b2);
            }
        }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nb; ++j) {
                const bool st = (Tg[i][j] > 0) != (Tg[i][j + 1] > 0) ||
                                (Tg[i][j] > 0) != (Tg[i + 1][j] > 0);
                const bool sd = (Dg[i][j] > 0) != (Dg[i][j + 1] > 0) ||
                                (Dg[i][j] > 0) != (Dg[i + 1][j] > 0);
                if (st && sd)
                    seeds.push_back({x_tc + 1e-4 + (0.95 - x_tc) * (i + 0.5) / nx,
                                     cfg.beta2_lo +
                                         (cfg.beta2_hi - cfg.beta2_lo) * (j + 0.5) / nb});
            }
        for (const auto& sd : seeds) {
            Eigen::Vector2d X(sd[0], sd[1]);
            bool ok = true;
            for (int it = 0; it < 50; ++it) {
                Eigen::Vector2d R(trace_xb(X(0), X(1)), det_xb(X(0), X(1)));
                if (R.norm() < 1e-12) break;
                Eigen::Matrix2d Jm;
                const double h = 1e-8;
                for (int c = 0; c < 2; ++c) {
                    Eigen::Vector2d Xp = X, Xm = X;
                    Xp(c) += h;
                    Xm(c) -= h;
                    Jm.col(c) =
                        (Eigen::Vector2d(trace_xb(Xp(0), Xp(1)), det_xb(Xp(0), Xp(1))) -
                         Eigen::Vector2d(trace_xb(Xm(0), Xm(1)), det_xb(Xm(0), Xm(1)))) /
                        (2.0 * h);
                }
                Eigen::Vector2d d = Jm.partialPivLu().solve(-R);
                if (!d.allFinite()) {
                    ok = false;
                    break;
                }
                X += d;
                if (X(0) < 1e-3 || X(0) > 1.0) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            if (std::abs(trace_xb(X(0), X(1))) > 1e-10 ||
                std::abs(det_xb(X(0), X(1))) > 1e-10)
                continue;
            Params q = p;
            q.beta2 = X(1);
            const double z = superslow_G(X(0), q);
            bool dup = false;
            for (const auto& b : out.bt)
                if (std::abs(b.par1 - z) < 1e-4 && std::abs(b.par2 - X(1)) < 1e-4)
                    dup = true;
            if (!dup && std::isfinite(z)) {
                BifPoint bp;
                bp.kind = BifKind::BogdanovTakens;
                bp.par1 = z;
                bp.par2 = X(1);
                bp.s = {X(0), std::max(0.0, y_on_z_curve(X(0), p)), z};
                out.bt.push_back(bp);
            }
        }

        // y = 0 branch: chi = 0 fixes x*, then phi_x(x*, 0, H(x*)) = 0 in beta2
        {
            const double xs = x_tc;
            auto g = [&](double b2) {
                Params q = p;
                q.beta2 = b2;
                const double z = superslow_H(xs, q);
                return partials({xs, 0.0, z}, q).phi_x;
            };
            RootConfig rc;
            rc.grid_n = 4000;
            for (double b2 : find_roots(g, cfg.beta2_lo, cfg.beta2_hi, rc)) {
                Params q = p;
                q.beta2 = b2;
                const double z = superslow_H(xs, q);
                if (!(z > 0.0)) continue;
                BifPoint bp;
                bp.kind = BifKind::BogdanovTakens;
                bp.par1 = z;
                bp.par2 = b2;
                bp.s = {xs, 0.0, z};
                out.bt.push_back(bp);
            }
        }
    }

    // SN_p curves traced from the generalized-Hopf points (best effort)
    if (cfg.trace_snp) {
        for (const auto& g : out.gh) {
            for (double dirn : {+1.0, -1.0}) {
                for (int k = 1; k <= cfg.snp_steps; ++k) {
                    Params q = p;
                    q.beta2 = g.par2 + dirn * k * 5e-4;
                    if (q.beta2 <= cfg.beta2_lo || q.beta2 >= cfg.beta2_hi) break;
                    auto hp = hopf_points_fast(q);
                    const HopfPointFast* hbest = nullptr;
                    double best = 1e300;
                    for (const auto& h : hp) {
                        if (h.curve != SuperslowWhich::Z) continue;
                        const double d = std::abs(h.x - g.s.x);
                        if (d < best) {
                            best = d;
                            hbest = &h;
                        }
                    }
                    if (!hbest || best > 0.15) break;
                    LayerCycleBranch cb =
                        continue_layer_cycle(q, *hbest, 1e-4, 3.0, 2e4);
                    if (cb.snp_z.empty()) break;
                    out.snp.push_back({cb.snp_z.front(), q.beta2, hbest->x, 0});
                }
            }
        }
    }
    return out;
}

}  // namespace triscale
