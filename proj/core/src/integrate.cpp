#include "triscale/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace triscale {

OdeScheme resolve_scheme(const IntegratorConfig& cfg, const Params& p) {
    switch (cfg.scheme) {
        case Scheme::Explicit: return OdeScheme::DormandPrince;
        case Scheme::Implicit: return OdeScheme::Radau;
        default:
            return (p.epsilon * p.delta <= 0.01) ? OdeScheme::Radau
                                                 : OdeScheme::DormandPrince;
    }
}

namespace {

OdeSystem model_system(const Params& p, Frame frame) {
    OdeSystem sys;
    sys.n = 3;
    sys.rhs = [&p, frame](const double* u, double* f) {
        auto v = vector_field({u[0], u[1], u[2]}, p, frame);
        f[0] = v[0];
        f[1] = v[1];
        f[2] = v[2];
    };
    sys.jac = [&p, frame](const double* u, double* jac) {
        Eigen::Matrix3d J = jacobian({u[0], u[1], u[2]}, p, frame);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) jac[j * 3 + i] = J(i, j);
    };
    return sys;
}

OdeOptions make_options(const IntegratorConfig& cfg, const Params& p) {
    OdeOptions o;
    o.rtol = std::max(cfg.rtol, 1e-13);
    o.atol = std::max(cfg.atol, 1e-16);
    o.initial_step = cfg.initial_step;
    o.max_step = cfg.max_step;
    if (o.max_step <= 0.0) {
        // default cap: half an intermediate-time unit, so the slow passage
        // oscillations near the layer Hopf points are never stepped over
        switch (cfg.frame) {
            case Frame::Fast: o.max_step = 0.5 / p.epsilon; break;
            case Frame::Intermediate: o.max_step = 0.5; break;
            case Frame::Slow: o.max_step = 0.5 * p.delta; break;
        }
    }
    o.scheme = resolve_scheme(cfg, p);
    const double floor = cfg.nonneg_floor;
    o.admissible = [floor](const double* u) {
        return u[0] >= -floor && u[1] >= -floor && u[2] >= -floor;
    };
    o.project = [floor](const double* u0, double* u1) {
        bool changed = false;
        for (int i = 0; i < 3; ++i) {
            // coordinate planes are flow-invariant: an exact zero stays zero
            // (implicit stages would otherwise leak linear-solve roundoff)
            if (u0[i] == 0.0 && u1[i] != 0.0) {
                u1[i] = 0.0;
                changed = true;
            } else if (u1[i] < 0.0 && u1[i] >= -floor) {
                u1[i] = 0.0;
                changed = true;
            }
        }
        return changed;
    };
    return o;
}

// Roots of the derivative of the Hermite cubic for component `ic` inside
// (t0, t1); used to place XMax/XMin events.
void extremum_events(const OdeStepRecord& rec, int ic, std::vector<Event>& events) {
    const double h = rec.t1 - rec.t0;
    const double d = rec.u1[ic] - rec.u0[ic];
    const double f0 = rec.f0[ic], f1 = rec.f1[ic];
    // p'(th)/h with p the Hermite cubic: quadratic a*th^2 + b*th + c
    const double a = 3.0 * (h * f0 + h * f1 - 2.0 * d);
    const double b = -4.0 * h * f0 - 2.0 * h * f1 + 6.0 * d;
    const double c = h * f0;
    auto add_root = [&](double th) {
        if (th <= 1e-12 || th >= 1.0 - 1e-12) return;
        const double slope = 2.0 * a * th + b;
        const double t = rec.t0 + th * h;
        std::array<double, 3> u;
        rec.eval(t, u.data());
        events.push_back({t, slope < 0.0 ? EventKind::XMax : EventKind::XMin,
                          {u[0], u[1], u[2]}});
    };
    if (std::abs(a) < 1e-300) {
        if (std::abs(b) > 0.0) add_root(-c / b);
        return;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // numerically stable pair
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    add_root(q / a);
    if (q != 0.0) add_root(c / q);
}

}  // namespace

State Trajectory::eval(double time) const {
    if (t.empty()) return {};
    if (time <= t.front()) return u.front();
    if (time >= t.back()) return u.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin());
    OdeStepRecord rec;
    rec.t0 = t[k - 1];
    rec.t1 = t[k];
    rec.u0 = {u[k - 1].x, u[k - 1].y, u[k - 1].z};
    rec.u1 = {u[k].x, u[k].y, u[k].z};
    rec.f0 = {du[k - 1][0], du[k - 1][1], du[k - 1][2]};
    rec.f1 = {du[k][0], du[k][1], du[k][2]};
    std::array<double, 3> out;
    rec.eval(time, out.data());
    return {out[0], out[1], out[2]};
}

std::array<double, 3> Trajectory::eval_deriv(double time) const {
    if (t.empty()) return {};
    if (time <= t.front()) return du.front();
    if (time >= t.back()) return du.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin());
    OdeStepRecord rec;
    rec.t0 = t[k - 1];
    rec.t1 = t[k];
    rec.u0 = {u[k - 1].x, u[k - 1].y, u[k - 1].z};
    rec.u1 = {u[k].x, u[k].y, u[k].z};
    rec.f0 = {du[k - 1][0], du[k - 1][1], du[k - 1][2]};
    rec.f1 = {du[k][0], du[k][1], du[k][2]};
    std::array<double, 3> out;
    rec.eval_deriv(time, out.data());
    return out;
}

Trajectory simulate(const Params& p, const State& s0, double t_end,
                    const IntegratorConfig& cfg) {
    Trajectory traj;
    traj.frame = cfg.frame;
    OdeSystem sys = model_system(p, cfg.frame);
    OdeOptions opts = make_options(cfg, p);

    std::vector<double> u = {s0.x, s0.y, s0.z};
    std::vector<double> f(3);
    sys.rhs(u.data(), f.data());
    traj.t.push_back(0.0);
    traj.u.push_back(s0);
    traj.du.push_back({f[0], f[1], f[2]});

    auto collect = [&traj](const OdeStepRecord& rec) {
        traj.t.push_back(rec.t1);
        traj.u.push_back({rec.u1[0], rec.u1[1], rec.u1[2]});
        traj.du.push_back({rec.f1[0], rec.f1[1], rec.f1[2]});
        extremum_events(rec, 0, traj.events);
        return true;
    };
    OdeResult r = integrate_ode(sys, u, 0.0, t_end, opts, collect);
    if (!r.ok) {
        traj.failed = true;
        traj.failure = r.message;
    }
    return traj;
}

PoincareResult poincare_section(const Params& p, const State& s0, const Section& sec,
                                int n_crossings, double t_end,
                                const IntegratorConfig& cfg) {
    PoincareResult out;
    OdeSystem sys = model_system(p, cfg.frame);
    OdeOptions opts = make_options(cfg, p);
    const double t_skip = cfg.transient_skip_fraction * t_end;

    auto g = [&sec](const double* u) {
        return sec.normal[0] * u[0] + sec.normal[1] * u[1] + sec.normal[2] * u[2]
             - sec.offset;
    };

    std::vector<double> u = {s0.x, s0.y, s0.z};
    auto on_step = [&](const OdeStepRecord& rec) {
        if (rec.t1 < t_skip) return true;
        double g0 = g(rec.u0.data());
        double g1 = g(rec.u1.data());
        if (g0 == 0.0 || (g0 > 0.0) == (g1 > 0.0)) return true;
        const bool increasing = g1 > g0;
        if (sec.direction > 0 && !increasing) return true;
        if (sec.direction < 0 && increasing) return true;
        // bisect the dense output to 1e-8 time tolerance
        double lo = rec.t0, hi = rec.t1;
        std::array<double, 3> mid;
        while (hi - lo > 1e-8) {
            const double tm = 0.5 * (lo + hi);
            rec.eval(tm, mid.data());
            const double gm = g(mid.data());
            if ((gm > 0.0) == (g0 > 0.0)) {
                lo = tm;
                g0 = gm;
            } else {
                hi = tm;
            }
        }
        const double tc = 0.5 * (lo + hi);
        rec.eval(tc, mid.data());
        out.points.push_back({mid[0], mid[1], mid[2]});
        out.times.push_back(tc);
        return static_cast<int>(out.points.size()) < n_crossings;
    };
    integrate_ode(sys, u, 0.0, t_end, opts, on_step);
    out.complete = static_cast<int>(out.points.size()) >= n_crossings;
    return out;
}

OrderMeasurement convergence_order(OdeScheme scheme) {
    // u' = A u with eigenvalues {-1, -10, -100} through a mild similarity.
    const Eigen::Vector3d lam(-1.0, -10.0, -100.0);
    Eigen::Matrix3d T;
    T << 1, 1, 0,
         0, 1, 1,
         1, 0, 1;
    const Eigen::Matrix3d Ti = T.inverse();
    const Eigen::Matrix3d A = T * lam.asDiagonal() * Ti;

    OdeSystem sys;
    sys.n = 3;
    sys.rhs = [&A](const double* u, double* f) {
        Eigen::Map<const Eigen::Vector3d> x(u);
        Eigen::Map<Eigen::Vector3d> y(f);
        y = A * x;
    };
    sys.jac = [&A](const double*, double* jac) {
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) jac[j * 3 + i] = A(i, j);
    };

    const Eigen::Vector3d w0(1.0, -0.5, 0.25);
    const Eigen::Vector3d u0 = T * w0;
    const double t_end = 0.5;
    const Eigen::Vector3d exact =
        T * (lam.array() * t_end).exp().matrix().asDiagonal() * w0;

    OrderMeasurement m;
    for (double h : {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320}) {
        OdeOptions opts;
        opts.scheme = scheme;
        opts.fixed_step = h;
        std::vector<double> u = {u0(0), u0(1), u0(2)};
        integrate_ode(sys, u, 0.0, t_end, opts);
        const double err = (Eigen::Vector3d(u[0], u[1], u[2]) - exact).norm();
        m.steps.push_back(h);
        m.errors.push_back(err);
    }
    // least-squares slope of log err vs log h
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(m.steps.size());
    for (int i = 0; i < n; ++i) {
        const double X = std::log(m.steps[i]);
        const double Y = std::log(std::max(m.errors[i], 1e-300));
        sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    }
    m.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return m;
}

}  // namespace triscale
