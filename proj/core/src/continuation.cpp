#include "triscale/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "triscale/ode.hpp"

namespace triscale {

const char* to_string(BifKind k) {
    switch (k) {
        case BifKind::Hopf: return "hopf";
        case BifKind::SaddleNode: return "saddle-node";
        case BifKind::Transcritical: return "transcritical";
        case BifKind::PeriodDoubling: return "period-doubling";
        case BifKind::Torus: return "torus";
        case BifKind::CyclicFold: return "cyclic-fold";
        case BifKind::HomoclinicApprox: return "homoclinic-approx";
        case BifKind::BogdanovTakens: return "bogdanov-takens";
        case BifKind::Cusp: return "cusp";
        case BifKind::GeneralizedHopf: return "generalized-hopf";
    }
    return "?";
}

double* param_slot(Params& p, const std::string& name) {
    if (name == "beta2") return &p.beta2;
    if (name == "alpha") return &p.alpha;
    if (name == "beta1") return &p.beta1;
    if (name == "delta") return &p.delta;
    if (name == "epsilon") return &p.epsilon;
    if (name == "delta1") return &p.delta1;
    if (name == "delta2") return &p.delta2;
    if (name == "delta3") return &p.delta3;
    if (name == "gamma1") return &p.gamma1;
    if (name == "gamma2") return &p.gamma2;
    return nullptr;
}

namespace {

std::array<std::complex<double>, 3> sorted_eigs(const Eigen::Matrix3d& J) {
    Eigen::EigenSolver<Eigen::Matrix3d> es(J);
    std::array<std::complex<double>, 3> ev{es.eigenvalues()(0), es.eigenvalues()(1),
                                           es.eigenvalues()(2)};
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() < b.real(); });
    return ev;
}

// Real part of the complex eigenvalue pair, or NaN when all are real.
double pair_real(const std::array<std::complex<double>, 3>& ev) {
    for (const auto& e : ev)
        if (std::abs(e.imag()) > 1e-12) return e.real();
    return std::numeric_limits<double>::quiet_NaN();
}

// Newton solve of vector_field = 0 at fixed parameter value; returns success.
bool corrector_fixed(Params p, const std::string& par, double lam, State& s,
                     double tol, int max_iter) {
    *param_slot(p, par) = lam;
    Eigen::Vector3d u(s.x, s.y, s.z);
    for (int it = 0; it < max_iter; ++it) {
        const State st{u(0), u(1), u(2)};
        auto f = vector_field(st, p, Frame::Fast);
        Eigen::Vector3d F(f[0], f[1], f[2]);
        if (F.norm() < tol) {
            s = st;
            return true;
        }
        Eigen::Matrix3d J = jacobian(st, p, Frame::Fast);
        Eigen::Vector3d d = J.partialPivLu().solve(-F);
        if (!d.allFinite()) return false;
        u += d;
    }
    const State st{u(0), u(1), u(2)};
    auto f = vector_field(st, p, Frame::Fast);
    if (Eigen::Vector3d(f[0], f[1], f[2]).norm() < 10 * tol) {
        s = st;
        return true;
    }
    return false;
}

}  // namespace

Branch continue_equilibrium(const Params& p0, const std::string& parameter,
                            double from, double to, const State& seed,
                            const ContinuationConfig& cfg) {
    Branch br;
    br.kind = BranchKind::Equilibrium;
    br.parameter = parameter;

    Params p = p0;
    double* slot = param_slot(p, parameter);
    if (!slot) {
        br.truncated = true;
        br.note = "unknown parameter";
        return br;
    }

    // residual and Jacobian of the extended system F(u, lam) = 0
    auto Fval = [&](const Eigen::Vector4d& U) {
        Params q = p0;
        *param_slot(q, parameter) = U(3);
        auto f = vector_field({U(0), U(1), U(2)}, q, Frame::Fast);
        return Eigen::Vector3d(f[0], f[1], f[2]);
    };
    auto Fjac = [&](const Eigen::Vector4d& U) {
        Params q = p0;
        *param_slot(q, parameter) = U(3);
        Eigen::Matrix<double, 3, 4> J;
        J.block<3, 3>(0, 0) = jacobian({U(0), U(1), U(2)}, q, Frame::Fast);
        const double h = 1e-7 * std::max(1.0, std::abs(U(3)));
        Eigen::Vector4d Up = U, Um = U;
        Up(3) += h;
        Um(3) -= h;
        J.col(3) = (Fval(Up) - Fval(Um)) / (2.0 * h);
        return J;
    };

    State s = seed;
    if (!corrector_fixed(p0, parameter, from, s, cfg.newton_tol, 30)) {
        br.truncated = true;
        br.note = "seed failed to converge";
        return br;
    }
    Eigen::Vector4d U(s.x, s.y, s.z, from);

    auto record = [&](const Eigen::Vector4d& Uc) {
        Params q = p0;
        *param_slot(q, parameter) = Uc(3);
        BranchPoint bp;
        bp.par1 = Uc(3);
        bp.s = {Uc(0), Uc(1), Uc(2)};
        bp.eig = sorted_eigs(jacobian(bp.s, q, Frame::Fast));
        bp.stable = std::all_of(bp.eig.begin(), bp.eig.end(),
                                [](auto e) { return e.real() < 0.0; });
        bp.x_min = bp.x_max = bp.s.x;
        bp.residual = Fval(Uc).norm();
        br.points.push_back(bp);
    };
    record(U);

    // initial tangent: kernel of the 3x4 Jacobian, oriented toward `to`
    auto tangent_at = [&](const Eigen::Vector4d& Uc) {
        Eigen::Matrix<double, 3, 4> J = Fjac(Uc);
        Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(J, Eigen::ComputeFullV);
        Eigen::Vector4d t = svd.matrixV().col(3);
        return t;
    };
    Eigen::Vector4d T = tangent_at(U);
    if ((to > from && T(3) < 0) || (to < from && T(3) > 0)) T = -T;

    double h = cfg.step;
    const double dir_sign = to > from ? 1.0 : -1.0;

    auto detect_hopf = [&](double lam_lo, double lam_hi, const State& near) {
        // natural-parameter bisection of the complex-pair real part
        State sb = near;
        auto re_at = [&](double lam) {
            State sc = sb;
            if (!corrector_fixed(p0, parameter, lam, sc, cfg.newton_tol, 30))
                return std::numeric_limits<double>::quiet_NaN();
            sb = sc;
            Params q = p0;
            *param_slot(q, parameter) = lam;
            return pair_real(sorted_eigs(jacobian(sc, q, Frame::Fast)));
        };
        double lo = lam_lo, hi = lam_hi;
        double flo = re_at(lo);
        for (int i = 0; i < 80 && std::abs(hi - lo) > 1e-8; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = re_at(mid);
            if (!std::isfinite(fm) || !std::isfinite(flo)) break;
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const double lam = 0.5 * (lo + hi);
        State sc = near;
        corrector_fixed(p0, parameter, lam, sc, cfg.newton_tol, 30);
        Params q = p0;
        *param_slot(q, parameter) = lam;
        auto ev = sorted_eigs(jacobian(sc, q, Frame::Fast));
        double om = 0.0;
        for (const auto& e : ev) om = std::max(om, std::abs(e.imag()));
        br.detected.push_back({BifKind::Hopf, lam, 0.0, sc, 0.0, om});
    };

    int consecutive_failures = 0;
    while (static_cast<int>(br.points.size()) < cfg.max_points) {
        const Eigen::Vector4d Uprev = U;
        const double lam_prev = U(3);
        const double re_prev = pair_real(sorted_eigs(
            [&] {
                Params q = p0;
                *param_slot(q, parameter) = lam_prev;
                return jacobian({U(0), U(1), U(2)}, q, Frame::Fast);
            }()));

        // predictor-corrector
        Eigen::Vector4d Up = U + h * dir_sign * T;
        bool ok = false;
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            Eigen::Vector3d F = Fval(Up);
            const double phase = T.dot(Up - (U + h * dir_sign * T));
            Eigen::Vector4d R;
            R << F, phase;
            if (R.norm() < cfg.newton_tol) {
                ok = true;
                break;
            }
            Eigen::Matrix4d Jx;
            Jx.block<3, 4>(0, 0) = Fjac(Up);
            Jx.row(3) = T.transpose();
            Eigen::Vector4d d = Jx.partialPivLu().solve(-R);
            if (!d.allFinite()) break;
            Up += d;
        }
        if (!ok) {
            h *= 0.5;
            if (++consecutive_failures > 40 || h < cfg.step_min) {
                br.truncated = true;
                br.note = "corrector stalled";
                break;
            }
            continue;
        }
        consecutive_failures = 0;
        U = Up;
        record(U);

        // eigenvalue test functions between lam_prev and U(3)
        const double re_cur = pair_real(br.points.back().eig);
        if (std::isfinite(re_prev) && std::isfinite(re_cur) &&
            (re_prev > 0) != (re_cur > 0)) {
            detect_hopf(std::min(lam_prev, U(3)), std::max(lam_prev, U(3)),
                        {Uprev(0), Uprev(1), Uprev(2)});
        }
        // fold: parameter direction of travel flips
        Eigen::Vector4d Tn = tangent_at(U);
        if (T.dot(Tn) < 0) Tn = -Tn;
        if (T(3) * Tn(3) < 0.0) {
            BifPoint bp;
            bp.kind = BifKind::SaddleNode;
            bp.par1 = U(3);
            bp.s = {U(0), U(1), U(2)};
            br.detected.push_back(bp);
        }
        // boundary-family intersection
        if ((std::abs(U(1)) < 1e-9 || std::abs(U(2)) < 1e-9) &&
            br.points.size() > 2 &&
            (std::abs(Uprev(1)) > 1e-9 && std::abs(Uprev(2)) > 1e-9)) {
            BifPoint bp;
            bp.kind = BifKind::Transcritical;
            bp.par1 = U(3);
            bp.s = {U(0), U(1), U(2)};
            br.detected.push_back(bp);
        }
        T = Tn;
        h = std::min(h * 1.3, cfg.step_max);

        if ((dir_sign > 0 && U(3) >= to) || (dir_sign < 0 && U(3) <= to)) break;
        if (U(0) < -0.2 || U(0) > 2.0) break;  // left the region of interest
    }
    return br;
}

namespace {

// bialternate product 2 J (.) I for n = 3; its determinant vanishes when a
// pair of eigenvalues sums to zero (Hopf or neutral saddle).
double bialt_det(const Eigen::Matrix3d& J) {
    Eigen::Matrix3d B;
    B << J(0, 0) + J(1, 1), J(1, 2), -J(0, 2),
         J(2, 1), J(0, 0) + J(2, 2), J(0, 1),
         -J(2, 0), J(1, 0), J(1, 1) + J(2, 2);
    return B.determinant();
}

}  // namespace

HopfCurve continue_hopf_2par(const Params& p0, double beta2_seed, const State& seed,
                             double beta2_lo, double beta2_hi, double alpha_lo,
                             double alpha_hi, const ContinuationConfig& cfg) {
    HopfCurve curve;
    using Vec5 = Eigen::Matrix<double, 5, 1>;

    auto Fval = [&](const Vec5& U) {
        Params q = p0;
        q.beta2 = U(3);
        q.alpha = U(4);
        const State s{U(0), U(1), U(2)};
        auto f = vector_field(s, q, Frame::Fast);
        Eigen::Vector4d F;
        F << f[0], f[1], f[2], bialt_det(jacobian(s, q, Frame::Fast));
        return F;
    };
    auto Fjac = [&](const Vec5& U) {
        Eigen::Matrix<double, 4, 5> J;
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(U(j)));
            Vec5 Up = U, Um = U;
            Up(j) += h;
            Um(j) -= h;
            J.col(j) = (Fval(Up) - Fval(Um)) / (2.0 * h);
        }
        return J;
    };
    auto corrector = [&](Vec5& U, const Vec5& T, const Vec5& pred) {
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            Eigen::Vector4d F = Fval(U);
            Eigen::Matrix<double, 5, 1> R5;
            R5 << F, T.dot(U - pred);
            if (R5.norm() < cfg.newton_tol) return true;
            Eigen::Matrix<double, 5, 5> Jx;
            Jx.block<4, 5>(0, 0) = Fjac(U);
            Jx.row(4) = T.transpose();
            Vec5 d = Jx.partialPivLu().solve(-R5);
            if (!d.allFinite()) return false;
            U += d;
        }
        return Fval(U).norm() < 10 * cfg.newton_tol;
    };
    auto tangent_at = [&](const Vec5& U) {
        Eigen::Matrix<double, 4, 5> J = Fjac(U);
        Eigen::JacobiSVD<Eigen::Matrix<double, 4, 5>> svd(J, Eigen::ComputeFullV);
        Vec5 t = svd.matrixV().col(4);
        return t;
    };
    auto record = [&](const Vec5& U) {
        Params q = p0;
        q.beta2 = U(3);
        q.alpha = U(4);
        const State s{U(0), U(1), U(2)};
        auto ev = sorted_eigs(jacobian(s, q, Frame::Fast));
        double om = 0.0;
        for (const auto& e : ev) om = std::max(om, std::abs(e.imag()));
        curve.points.push_back({U(3), U(4), s, om * om});
        return om;
    };

    Vec5 U;
    U << seed.x, seed.y, seed.z, beta2_seed, p0.alpha;
    {   // converge the seed onto the Hopf manifold (fix alpha via phase on it)
        Vec5 T0 = Vec5::Zero();
        T0(4) = 1.0;
        Vec5 pred = U;
        if (!corrector(U, T0, pred)) return curve;
    }

    for (double dir : {+1.0, -1.0}) {
        Vec5 Uc = U;
        Vec5 T = tangent_at(Uc);
        if (T(3) * dir < 0) T = -T;
        double h = cfg.step;
        double prev_om = record(Uc);
        if (dir > 0) curve.points.pop_back();  // avoid duplicating the seed later
        int fails = 0;
        for (int k = 0; k < cfg.max_points; ++k) {
            Vec5 pred = Uc + h * T;
            Vec5 Un = pred;
            if (!corrector(Un, T, pred)) {
                h *= 0.5;
                if (h < cfg.step_min || ++fails > 40) break;
                continue;
            }
            fails = 0;
            Uc = Un;
            const double om = record(Uc);
            // loss of the imaginary pair: Bogdanov-Takens endpoint
            if (om < 1e-6 && prev_om >= 1e-6) {
                BifPoint bp;
                bp.kind = BifKind::BogdanovTakens;
                bp.par1 = Uc(3);
                bp.par2 = Uc(4);
                bp.s = {Uc(0), Uc(1), Uc(2)};
                curve.degeneracies.push_back(bp);
            }
            prev_om = om;
            Vec5 Tn = tangent_at(Uc);
            if (T.dot(Tn) < 0) Tn = -Tn;
            T = Tn;
            h = std::min(h * 1.3, cfg.step_max);
            if (Uc(3) < beta2_lo || Uc(3) > beta2_hi || Uc(4) < alpha_lo ||
                Uc(4) > alpha_hi)
                break;
            // closed loop: back near the seed after some travel
            if (k > 20 && (Uc.segment<2>(3) - U.segment<2>(3)).norm() < cfg.step) {
                curve.closed = true;
                break;
            }
        }
        if (curve.closed) break;
    }
    return curve;
}

// ---------------------------------------------------------------------------
// periodic orbits by shooting

namespace {

// integrates state + 3x3 variational matrix over tau in the intermediate frame
struct FlowResult {
    State s;
    Eigen::Matrix3d M;
    bool ok;
};

FlowResult flow_with_variational(const Params& p, const State& s0, double tau,
                                 double rtol, double atol) {
    OdeSystem sys;
    sys.n = 12;
    sys.rhs = [&p](const double* u, double* f) {
        const State s{u[0], u[1], u[2]};
        auto v = vector_field(s, p, Frame::Intermediate);
        f[0] = v[0];
        f[1] = v[1];
        f[2] = v[2];
        const Eigen::Matrix3d J = jacobian(s, p, Frame::Intermediate);
        Eigen::Map<const Eigen::Matrix3d> V(u + 3);
        Eigen::Map<Eigen::Matrix3d> dV(f + 3);
        dV = J * V;
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    opts.scheme = OdeScheme::Radau;
    opts.initial_step = 1e-5;
    std::vector<double> u(12, 0.0);
    u[0] = s0.x;
    u[1] = s0.y;
    u[2] = s0.z;
    u[3] = u[7] = u[11] = 1.0;
    OdeResult r = integrate_ode(sys, u, 0.0, tau, opts);
    FlowResult out;
    out.ok = r.ok;
    out.s = {u[0], u[1], u[2]};
    out.M = Eigen::Map<Eigen::Matrix3d>(u.data() + 3);
    return out;
}

State flow_only(const Params& p, const State& s0, double tau, double rtol,
                double atol, bool* ok = nullptr) {
    OdeSystem sys;
    sys.n = 3;
    sys.rhs = [&p](const double* u, double* f) {
        auto v = vector_field({u[0], u[1], u[2]}, p, Frame::Intermediate);
        f[0] = v[0];
        f[1] = v[1];
        f[2] = v[2];
    };
    sys.jac = [&p](const double* u, double* jac) {
        Eigen::Matrix3d J = jacobian({u[0], u[1], u[2]}, p, Frame::Intermediate);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) jac[j * 3 + i] = J(i, j);
    };
    OdeOptions opts;
    opts.rtol = rtol;
    opts.atol = atol;
    opts.scheme = OdeScheme::Radau;
    opts.initial_step = 1e-5;
    std::vector<double> u = {s0.x, s0.y, s0.z};
    OdeResult r = integrate_ode(sys, u, 0.0, tau, opts);
    if (ok) *ok = r.ok;
    return {u[0], u[1], u[2]};
}

}  // namespace

std::array<std::complex<double>, 3> floquet_multipliers(const Params& p,
                                                        const State& anchor,
                                                        double period, double rtol) {
    FlowResult fr = flow_with_variational(p, anchor, period, rtol, rtol * 1e-2);
    Eigen::EigenSolver<Eigen::Matrix3d> es(fr.M);
    std::array<std::complex<double>, 3> mu{es.eigenvalues()(0), es.eigenvalues()(1),
                                           es.eigenvalues()(2)};
    std::sort(mu.begin(), mu.end(),
              [](auto a, auto b) { return std::abs(a) > std::abs(b); });
    return mu;
}

bool find_periodic_orbit(const Params& p, double t_settle, const State& guess,
                         const ShootingConfig& cfg, State& anchor, double& period) {
    // settle toward the attractor; near a weak Hopf the escape from the
    // equilibrium is slow, so extend until the x-peak amplitude saturates
    IntegratorConfig ic;
    ic.rtol = cfg.rtol;
    ic.atol = cfg.atol;
    auto settle_range = [&](State& s, double horizon, double& lo, double& hi,
                            bool& saturated) {
        Trajectory tr = simulate(p, s, horizon, ic);
        if (tr.failed || tr.u.empty()) return false;
        s = tr.u.back();
        std::vector<double> peaks;
        for (const auto& e : tr.events)
            if (e.kind == EventKind::XMax && e.t > 0.5 * horizon)
                peaks.push_back(e.s.x);
        lo = 1e300;
        hi = -1e300;
        for (size_t i = 0; i < tr.t.size(); ++i) {
            if (tr.t[i] < 0.8 * horizon) continue;
            lo = std::min(lo, tr.u[i].y);
            hi = std::max(hi, tr.u[i].y);
        }
        saturated = false;
        if (peaks.size() >= 3) {
            const double a = peaks[peaks.size() - 3], b = peaks.back();
            saturated = std::abs(b - a) <= 1e-4 * std::max(1e-12, std::abs(b));
        }
        return true;
    };

    State s_end = guess;
    double y_lo = 0.0, y_hi = 0.0;
    bool saturated = false;
    if (!settle_range(s_end, t_settle, y_lo, y_hi, saturated)) return false;

    if (y_hi - y_lo < 1e-4) {
        // collapsed onto a weakly unstable focus: kick outward along the
        // unstable eigenplane beyond the nearby small cycle and re-settle
        for (const auto& e : equilibria(p)) {
            if (e.kind != EquilibriumKind::Coexistent) continue;
            Eigen::EigenSolver<Eigen::Matrix3d> es(jacobian(e.s, p, Frame::Intermediate));
            int iu = -1;
            for (int i = 0; i < 3; ++i)
                if (es.eigenvalues()(i).imag() > 1e-12 &&
                    es.eigenvalues()(i).real() > 0.0)
                    iu = i;
            if (iu < 0) break;
            Eigen::Vector3d v = es.eigenvectors().col(iu).real();
            v.normalize();
            s_end = {e.s.x + 0.05 * v(0), e.s.y + 0.05 * v(1), e.s.z + 0.05 * v(2)};
            const double omega = es.eigenvalues()(iu).imag();
            const double horizon = 30.0 * 2.0 * M_PI / std::max(1e-6, omega);
            if (!settle_range(s_end, horizon, y_lo, y_hi, saturated)) return false;
            break;
        }
    }
    for (int attempt = 0; attempt < 6 && !saturated; ++attempt) {
        if (!settle_range(s_end, t_settle, y_lo, y_hi, saturated)) return false;
    }
    if (!(y_hi > y_lo)) return false;

    Section sec;
    sec.normal = {0.0, 1.0, 0.0};
    sec.offset = 0.5 * (y_lo + y_hi);
    sec.direction = +1;
    ic.transient_skip_fraction = 0.0;
    PoincareResult pr = poincare_section(p, s_end, sec, 9, 60.0 * t_settle, ic);
    if (pr.points.size() < 2) return false;
    // the section may be crossed several times per period: find the previous
    // crossing that returns to the last one in state space
    const size_t last = pr.points.size() - 1;
    anchor = pr.points[last];
    period = 0.0;
    for (size_t j = last; j-- > 0;) {
        const double d = std::hypot(std::hypot(pr.points[j].x - anchor.x,
                                               pr.points[j].y - anchor.y),
                                    pr.points[j].z - anchor.z);
        if (d < 1e-3) {
            period = pr.times[last] - pr.times[j];
            break;
        }
    }
    if (period <= 0.0) period = pr.times[last] - pr.times[last - 1];

    // Newton on [Phi_T(u) - u; u_y - anchor_y]
    Eigen::Vector4d U(anchor.x, anchor.y, anchor.z, period);
    const double anchor_y = anchor.y;
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        FlowResult fr = flow_with_variational(p, {U(0), U(1), U(2)}, U(3), cfg.rtol,
                                              cfg.atol);
        if (!fr.ok) return false;
        auto fT = vector_field(fr.s, p, Frame::Intermediate);
        Eigen::Vector4d R(fr.s.x - U(0), fr.s.y - U(1), fr.s.z - U(2),
                          U(1) - anchor_y);
        if (R.norm() < cfg.newton_tol) break;
        Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
        J.block<3, 3>(0, 0) = fr.M - Eigen::Matrix3d::Identity();
        J(0, 3) = fT[0];
        J(1, 3) = fT[1];
        J(2, 3) = fT[2];
        J(3, 1) = 1.0;
        Eigen::Vector4d d = J.partialPivLu().solve(-R);
        if (!d.allFinite()) return false;
        U += d;
        if (U(3) <= 0) return false;
    }
    anchor = {U(0), U(1), U(2)};
    period = U(3);
    FlowResult fr = flow_with_variational(p, anchor, period, cfg.rtol, cfg.atol);
    Eigen::Vector3d R(fr.s.x - anchor.x, fr.s.y - anchor.y, fr.s.z - anchor.z);
    if (!fr.ok || R.norm() >= 100 * cfg.newton_tol) return false;
    // reject the trivial equilibrium family
    for (const auto& e : equilibria(p)) {
        const double d = std::hypot(std::hypot(anchor.x - e.s.x, anchor.y - e.s.y),
                                    anchor.z - e.s.z);
        if (d < 1e-6) return false;
    }
    return true;
}

namespace {

struct MsState {
    Eigen::VectorXd U;  // m*3 states + period + parameter
    int m;
};

// multiple-shooting residual/Jacobian helper for periodic continuation;
// the parameter coordinate U(3m+1) is the physical value divided by
// cfg.par_scale so state drift and parameter progress share the arclength
class MsSystem {
  public:
    MsSystem(const Params& base, const std::string& par, int m,
             const ShootingConfig& cfg)
        : base_(base), par_(par), m_(m), cfg_(cfg) {}

    int dim() const { return 3 * m_ + 2; }
    int neq() const { return 3 * m_ + 1; }

    Params params_at(double lam_scaled) const {
        Params q = base_;
        *param_slot(q, par_) = lam_scaled * cfg_.par_scale;
        return q;
    }

    // residual: segment matching (3m) + phase anchor (1)
    bool residual(const Eigen::VectorXd& U, Eigen::VectorXd& R,
                  std::vector<Eigen::Matrix3d>* Ms = nullptr,
                  std::vector<std::array<double, 3>>* fT = nullptr) const {
        const double T = U(3 * m_);
        const double lam = U(3 * m_ + 1);
        if (T <= 0) return false;
        const Params q = params_at(lam);
        R.resize(neq());
        if (Ms) Ms->resize(m_);
        if (fT) fT->resize(m_);
        for (int k = 0; k < m_; ++k) {
            const State sk{U(3 * k), U(3 * k + 1), U(3 * k + 2)};
            FlowResult fr = flow_with_variational(q, sk, T / m_, cfg_.rtol, cfg_.atol);
            if (!fr.ok) return false;
            const int kn = (k + 1) % m_;
            R(3 * k) = fr.s.x - U(3 * kn);
            R(3 * k + 1) = fr.s.y - U(3 * kn + 1);
            R(3 * k + 2) = fr.s.z - U(3 * kn + 2);
            if (Ms) (*Ms)[k] = fr.M;
            if (fT) {
                auto f = vector_field(fr.s, q, Frame::Intermediate);
                (*fT)[k] = f;
            }
        }
        R(3 * m_) = U(1) - anchor_y_;  // phase: first node pinned in y
        return true;
    }

    // dense Jacobian of the residual (FD in T and lambda, variational in states)
    bool jacobian_full(const Eigen::VectorXd& U, Eigen::MatrixXd& J,
                       Eigen::VectorXd& R) const {
        std::vector<Eigen::Matrix3d> Ms;
        std::vector<std::array<double, 3>> fT;
        if (!residual(U, R, &Ms, &fT)) return false;
        J.setZero(neq(), dim());
        for (int k = 0; k < m_; ++k) {
            const int kn = (k + 1) % m_;
            J.block<3, 3>(3 * k, 3 * k) = Ms[k];
            J.block<3, 3>(3 * k, 3 * kn) -= Eigen::Matrix3d::Identity();
            for (int i = 0; i < 3; ++i) J(3 * k + i, 3 * m_) = fT[k][i] / m_;
        }
        J(3 * m_, 1) = 1.0;
        // parameter column by one-sided FD
        const double lam = U(3 * m_ + 1);
        const double h = 1e-7 * std::max(1.0, std::abs(lam));
        Eigen::VectorXd Up = U;
        Up(3 * m_ + 1) += h;
        Eigen::VectorXd Rp;
        if (!residual(Up, Rp)) return false;
        J.col(3 * m_ + 1) = (Rp - R) / h;
        return true;
    }

    void set_anchor(double y) { anchor_y_ = y; }
    double anchor() const { return anchor_y_; }

  private:
    Params base_;
    std::string par_;
    int m_;
    ShootingConfig cfg_;
    double anchor_y_ = 0.0;
};

}  // namespace

Branch continue_periodic(const Params& p0, const std::string& parameter,
                         double from, double to, const State& anchor0,
                         double period0, const ShootingConfig& cfg) {
    Branch br;
    br.kind = BranchKind::PeriodicOrbit;
    br.parameter = parameter;

    const int m = std::max(1, cfg.segments);
    MsSystem ms(p0, parameter, m, cfg);
    ms.set_anchor(anchor0.y);
    const double psc = cfg.par_scale;

    const int nu = 3 * m + 1;  // natural unknowns: nodes + period

    // orbit unknowns at fixed parameter; U has 3m+2 entries to reuse MsSystem
    auto corrector_nat = [&](Eigen::VectorXd& U) {
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            Eigen::MatrixXd J;
            Eigen::VectorXd R;
            if (!ms.jacobian_full(U, J, R)) return false;
            if (R.norm() < cfg.newton_tol) return true;
            Eigen::MatrixXd Jn = J.leftCols(nu);
            Eigen::VectorXd d = Jn.partialPivLu().solve(-R);
            if (!d.allFinite()) return false;
            U.head(nu) += d;
            if (U(3 * m) <= 0) return false;
        }
        Eigen::VectorXd R;
        return ms.residual(U, R) && R.norm() < 100 * cfg.newton_tol;
    };

    auto multipliers_at = [&](const Eigen::VectorXd& U) {
        std::vector<Eigen::Matrix3d> Ms;
        Eigen::VectorXd R;
        ms.residual(U, R, &Ms);
        Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
        for (int k = 0; k < m; ++k) M = Ms[k] * M;
        Eigen::EigenSolver<Eigen::Matrix3d> es(M);
        std::array<std::complex<double>, 3> mu{es.eigenvalues()(0),
                                               es.eigenvalues()(1),
                                               es.eigenvalues()(2)};
        std::sort(mu.begin(), mu.end(),
                  [](auto a, auto b) { return std::abs(a) > std::abs(b); });
        return mu;
    };

    auto nontrivial = [&](const std::array<std::complex<double>, 3>& mu) {
        int trivial = 0;
        double best = 1e300;
        for (int i = 0; i < 3; ++i) {
            const double d = std::abs(mu[i] - std::complex<double>(1.0, 0.0));
            if (d < best) {
                best = d;
                trivial = i;
            }
        }
        std::array<std::complex<double>, 2> out;
        int j = 0;
        for (int i = 0; i < 3; ++i)
            if (i != trivial) out[j++] = mu[i];
        return out;
    };

    auto orbit_extrema = [&](const Eigen::VectorXd& U, double& xmin, double& xmax) {
        const Params q = ms.params_at(U(3 * m + 1));
        IntegratorConfig ic;
        ic.rtol = cfg.rtol;
        ic.atol = cfg.atol;
        Trajectory tr = simulate(q, {U(0), U(1), U(2)}, U(3 * m), ic);
        xmin = 1e300;
        xmax = -1e300;
        for (const auto& s : tr.u) {
            xmin = std::min(xmin, s.x);
            xmax = std::max(xmax, s.x);
        }
    };

    auto near_equilibrium = [&](const Eigen::VectorXd& U) {
        const Params q = ms.params_at(U(3 * m + 1));
        for (const auto& e : equilibria(q)) {
            const double d = std::hypot(std::hypot(U(0) - e.s.x, U(1) - e.s.y),
                                        U(2) - e.s.z);
            if (d < 1e-6) return true;
        }
        return false;
    };

    auto record = [&](const Eigen::VectorXd& U) {
        BranchPoint bp;
        bp.par1 = U(3 * m + 1) * psc;
        bp.s = {U(0), U(1), U(2)};
        bp.period = U(3 * m);
        auto mu = multipliers_at(U);
        bp.eig = mu;
        auto nt = nontrivial(mu);
        bp.stable = std::abs(nt[0]) < 1.0 + 1e-9 && std::abs(nt[1]) < 1.0 + 1e-9;
        orbit_extrema(U, bp.x_min, bp.x_max);
        Eigen::VectorXd R;
        ms.residual(U, R);
        bp.residual = R.norm();
        br.points.push_back(bp);
        return nt;
    };

    auto push_bif = [&](BifKind kind, const Eigen::VectorXd& U) {
        BifPoint bp;
        bp.kind = kind;
        bp.par1 = U(3 * m + 1) * psc;
        bp.s = {U(0), U(1), U(2)};
        bp.period = U(3 * m);
        for (const auto& d : br.detected)
            if (d.kind == kind && std::abs(d.par1 - bp.par1) < 1e-5) return;
        br.detected.push_back(bp);
    };

    // multiplier test functions on the two nontrivial multipliers
    auto tf_pd = [](const std::array<std::complex<double>, 2>& nt2) {
        double v = 1e300;
        for (const auto& mu : nt2)
            if (std::abs(mu.imag()) < 1e-8 && mu.real() < 0.0)
                v = std::min(v, mu.real() + 1.0);
        return v == 1e300 ? 1.0 : v;
    };
    auto tf_torus = [](const std::array<std::complex<double>, 2>& nt2) {
        if (std::abs(nt2[0].imag()) > 1e-8) return std::abs(nt2[0]) - 1.0;
        return -1.0;
    };
    auto tf_fold = [](const std::array<std::complex<double>, 2>& nt2) {
        double v = 1e300;
        for (const auto& mu : nt2)
            if (std::abs(mu.imag()) < 1e-8 && mu.real() > 0.0)
                v = std::min(v, mu.real() - 1.0);
        return v == 1e300 ? -1.0 : v;
    };

    // natural-parameter bisection of a test-function sign change
    auto refine = [&](Eigen::VectorXd Ua, Eigen::VectorXd Ub,
                      const std::function<double(const std::array<std::complex<double>, 2>&)>& tf,
                      BifKind kind) {
        double fa = tf(nontrivial(multipliers_at(Ua)));
        for (int i = 0; i < 24; ++i) {
            if (std::abs(Ub(3 * m + 1) - Ua(3 * m + 1)) * psc < 1e-6) break;
            Eigen::VectorXd Um = 0.5 * (Ua + Ub);
            if (!corrector_nat(Um)) break;
            const double fm = tf(nontrivial(multipliers_at(Um)));
            if ((fm > 0) == (fa > 0)) {
                Ua = Um;
                fa = fm;
            } else {
                Ub = Um;
            }
        }
        push_bif(kind, Ub);
    };

    // seed at `from`
    Eigen::VectorXd U(3 * m + 2);
    {
        const Params q = ms.params_at(from / psc);
        State s = anchor0;
        for (int k = 0; k < m; ++k) {
            U(3 * k) = s.x;
            U(3 * k + 1) = s.y;
            U(3 * k + 2) = s.z;
            if (k + 1 < m) s = flow_only(q, s, period0 / m, cfg.rtol, cfg.atol);
        }
        U(3 * m) = period0;
        U(3 * m + 1) = from / psc;
    }
    if (!corrector_nat(U) || near_equilibrium(U)) {
        br.truncated = true;
        br.note = "seed orbit failed to converge";
        return br;
    }
    auto nt_prev = record(U);
    Eigen::VectorXd Uprev = U;
    bool have_prev2 = false;

    const double dir = to > from ? 1.0 : -1.0;
    double dlam = cfg.step * psc;  // physical parameter step
    const double dlam_min = std::max(cfg.step_min * psc, 1e-9);
    const double dlam_max = cfg.step_max * psc;

    while (static_cast<int>(br.points.size()) < cfg.max_points) {
        const double lam = U(3 * m + 1) * psc;
        if ((dir > 0 && lam >= to) || (dir < 0 && lam <= to)) break;
        double step = std::min(dlam, std::abs(to - lam));
        if (step <= 0) break;

        // predictor: linear extrapolation of nodes and period in lambda
        Eigen::VectorXd Un = U;
        Un(3 * m + 1) = (lam + dir * step) / psc;
        if (have_prev2) {
            const double dl_prev = (U(3 * m + 1) - Uprev(3 * m + 1));
            if (std::abs(dl_prev) > 1e-14) {
                const double w = (Un(3 * m + 1) - U(3 * m + 1)) / dl_prev;
                Un.head(nu) = U.head(nu) + w * (U.head(nu) - Uprev.head(nu));
            }
        }
        if (!corrector_nat(Un) || near_equilibrium(Un) ||
            std::abs(Un(3 * m) - U(3 * m)) > 0.5 * U(3 * m) + 5.0) {
            dlam = 0.5 * step;
            if (dlam >= dlam_min) continue;
            // fold suspicion: a brief pseudo-arclength detour in
            // (nodes, period, parameter) to get around the turning point
            bool detoured = false;
            {
                Eigen::MatrixXd J;
                Eigen::VectorXd R;
                if (ms.jacobian_full(U, J, R)) {
                    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
                    Eigen::VectorXd T = svd.matrixV().col(3 * m + 1);
                    if (T(3 * m + 1) * dir < 0) T = -T;
                    Eigen::VectorXd Ud = U;
                    double h = 10.0 * cfg.step_min;
                    for (int k = 0; k < 60 && !detoured; ++k) {
                        Eigen::VectorXd pred = Ud + h * T;
                        Eigen::VectorXd Uc = pred;
                        bool ok = true;
                        for (int it = 0; it < cfg.newton_max_iter; ++it) {
                            Eigen::MatrixXd Jd;
                            Eigen::VectorXd Rd;
                            if (!ms.jacobian_full(Uc, Jd, Rd)) {
                                ok = false;
                                break;
                            }
                            Eigen::VectorXd Rx(3 * m + 2);
                            Rx << Rd, T.dot(Uc - pred);
                            if (Rx.norm() < cfg.newton_tol) break;
                            Eigen::MatrixXd Jx(3 * m + 2, 3 * m + 2);
                            Jx.topRows(3 * m + 1) = Jd;
                            Jx.row(3 * m + 1) = T.transpose();
                            Eigen::VectorXd d = Jx.partialPivLu().solve(-Rx);
                            if (!d.allFinite()) {
                                ok = false;
                                break;
                            }
                            Uc += d;
                        }
                        if (!ok || near_equilibrium(Uc)) {
                            h *= 0.5;
                            if (h < cfg.step_min) break;
                            continue;
                        }
                        Eigen::MatrixXd J2;
                        Eigen::VectorXd R2;
                        if (!ms.jacobian_full(Uc, J2, R2)) break;
                        Eigen::JacobiSVD<Eigen::MatrixXd> svd2(J2, Eigen::ComputeFullV);
                        Eigen::VectorXd T2 = svd2.matrixV().col(3 * m + 1);
                        if (T.dot(T2) < 0) T2 = -T2;
                        T = T2;
                        Ud = Uc;
                        h = std::min(h * 1.5, 0.05);
                        // detour ends once the parameter makes real progress
                        if ((Ud(3 * m + 1) * psc - lam) * dir > 10.0 * dlam_min) {
                            ms.set_anchor(Ud(1));
                            Un = Ud;
                            detoured = true;
                        }
                    }
                }
            }
            if (!detoured) {
                br.truncated = true;
                br.note = "shooting corrector stalled";
                break;
            }
        }
        Uprev = U;
        have_prev2 = true;
        U = Un;
        ms.set_anchor(U(1));
        auto nt = record(U);
        dlam = std::min(dlam * 1.4, dlam_max);

        // period blow-up (fast-time units): homoclinic approximation
        const Params q = ms.params_at(U(3 * m + 1));
        if (U(3 * m) / q.epsilon > cfg.period_cap) {
            push_bif(BifKind::HomoclinicApprox, U);
            br.note = "period cap reached";
            break;
        }

        if ((tf_pd(nt_prev) > 0) != (tf_pd(nt) > 0))
            refine(Uprev, U, tf_pd, BifKind::PeriodDoubling);
        if ((tf_torus(nt_prev) > 0) != (tf_torus(nt) > 0))
            refine(Uprev, U, tf_torus, BifKind::Torus);
        if ((tf_fold(nt_prev) > 0) != (tf_fold(nt) > 0))
            refine(Uprev, U, tf_fold, BifKind::CyclicFold);
        nt_prev = nt;
    }
    return br;
}

}  // namespace triscale
