// Acceptance suite: one pass/fail line per criterion. Usage: acceptance [k]
// runs criterion k (1..9), or all when no argument is given.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "triscale/classify.hpp"
#include "triscale/continuation.hpp"
#include "triscale/fastsub.hpp"
#include "triscale/integrate.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"
#include "triscale/ode.hpp"
#include "triscale/reduced.hpp"

using namespace triscale;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

bool within(double value, double target, double rel) {
    return std::abs(value - target) <= rel * std::abs(target);
}

State fallback_start() { return {0.4, 0.1, 0.12}; }

// --- AC1: full-system Hopf points at alpha = 0.75 --------------------------
Outcome ac1() {
    Outcome out;
    const Params p = Params::preset_paper(0.75, 0.001);
    State seed{};
    bool found = false;
    for (const auto& e : equilibria(p))
        if (e.kind == EquilibriumKind::Coexistent) {
            seed = e.s;
            found = true;
        }
    if (!found) return {false, "no coexistence equilibrium at beta2=0.001"};
    Branch br = continue_equilibrium(p, "beta2", 0.001, 0.1, seed);
    std::vector<double> hopfs;
    for (const auto& b : br.detected)
        if (b.kind == BifKind::Hopf) hopfs.push_back(b.par1);
    std::ostringstream d;
    d << "Hopf at beta2 = {";
    for (double h : hopfs) d << " " << h;
    d << " }, targets 0.00524 and 0.066 (+-10%)";
    out.detail = d.str();
    bool h1 = false, h2 = false;
    for (double h : hopfs) {
        if (within(h, 0.00524, 0.10)) h1 = true;
        if (within(h, 0.066, 0.10)) h2 = true;
    }
    out.pass = h1 && h2;
    return out;
}

// --- AC2: layer-problem Hopf criticality at (0.005, 0.6) -------------------
Outcome ac2() {
    Outcome out;
    const Params p = Params::preset_paper(0.6, 0.005);
    std::vector<HopfPointFast> zh;
    for (const auto& h : hopf_points_fast(p))
        if (h.curve == SuperslowWhich::Z) zh.push_back(h);
    std::ostringstream d;
    if (zh.size() != 2) {
        d << zh.size() << " Hopf points on Z (want 2)";
        return {false, d.str()};
    }
    const bool subcrit = zh[0].subcritical && zh[1].subcritical;
    const bool v1 = within(zh[0].Delta, 0.145, 0.15);
    const bool v2 = within(zh[1].Delta, 1.33, 0.15);
    d << "two Hopf points, both " << (subcrit ? "subcritical" : "NOT subcritical")
      << "; Delta = {" << zh[0].Delta << ", " << zh[1].Delta
      << "} vs published {0.145, 1.33} (+-15%)";
    if (!(v1 && v2))
        d << " -- published values are not reproducible from a consistent "
             "model evaluation (see notes); criterion left red on the value "
             "clause";
    out.detail = d.str();
    out.pass = subcrit && v1 && v2;
    return out;
}

// --- AC3: degenerate-node count and interleaving ---------------------------
Outcome ac3() {
    Outcome out;
    const Params p = Params::preset_paper(0.6, 0.005);
    auto dn = degenerate_nodes(p);
    std::vector<double> hx;
    for (const auto& h : hopf_points_fast(p))
        if (h.curve == SuperslowWhich::Z) hx.push_back(h.x);
    std::ostringstream d;
    d << dn.size() << " roots of Lambda_eps in [0,1], " << hx.size()
      << " Hopf x-values";
    out.detail = d.str();
    if (dn.size() != 4 || hx.size() != 2) return {false, out.detail};
    out.pass = dn[0] < hx[0] && hx[0] < dn[1] && dn[1] < dn[2] && dn[2] < hx[1] &&
               hx[1] < dn[3];
    out.detail += out.pass ? " (interleaved)" : " (NOT interleaved)";
    return out;
}

// --- AC4: fold-curve classification at four points -------------------------
Outcome ac4() {
    struct Case {
        double b2, a;
        FoldCase want;
    } cases[] = {{0.048, 0.6, FoldCase::Case2i},
                 {0.025, 0.6, FoldCase::Case2ii},
                 {0.005, 0.6, FoldCase::Case3},
                 {0.0245, 0.8, FoldCase::Case2ii}};
    Outcome out;
    std::ostringstream d;
    for (const auto& c : cases) {
        const FoldCurve fc = fold_parametrization(Params::preset_paper(c.a, c.b2));
        d << "(" << c.b2 << ", " << c.a << ") -> " << to_string(fc.case_label) << "; ";
        if (fc.case_label != c.want) out.pass = false;
    }
    out.detail = d.str();
    return out;
}

// --- AC5: pattern classification at five points ----------------------------
Outcome ac5() {
    Outcome out;
    std::ostringstream d;
    auto run = [&](double b2, double a, double t_end) {
        const Params p = Params::preset_paper(a, b2);
        Trajectory tr = simulate(p, fallback_start(), t_end, {});
        PatternLabel lb = classify(tr, {}, &p);
        if (lb.kind == PatternKind::MMO || lb.kind == PatternKind::Bursting)
            lb.sao_location_hint = sao_locator(tr, fold_parametrization(p));
        return lb;
    };
    {
        const PatternLabel lb = run(0.01, 0.75, 2500.0);
        const bool ok = lb.kind == PatternKind::MMO &&
                        lb.sao_location_hint == SaoHint::F0;
        d << "(0.01,0.75)=" << to_string(lb.kind) << "/" << to_string(lb.sao_location_hint)
          << (ok ? " ok; " : " WANT mmo/F0; ");
        out.pass = out.pass && ok;
    }
    {
        const PatternLabel lb = run(0.0245, 0.8, 2500.0);
        const bool ok =
            lb.kind == PatternKind::Bursting && lb.spikes_per_burst >= 2;
        d << "(0.0245,0.8)=" << to_string(lb.kind) << "/" << lb.spikes_per_burst
          << " spikes" << (ok ? " ok; " : " WANT bursting >=2; ");
        out.pass = out.pass && ok;
    }
    {
        const PatternLabel lb = run(0.0245, 0.6, 1500.0);
        const bool ok = lb.kind == PatternKind::Spiking ||
                        lb.kind == PatternKind::RelaxationOscillation;
        d << "(0.0245,0.6)=" << to_string(lb.kind)
          << (ok ? " ok; " : " WANT spiking/relaxation; ");
        out.pass = out.pass && ok;
    }
    {
        const PatternLabel lb = run(0.0245, 0.4645, 2500.0);
        const bool ok = lb.kind == PatternKind::MMO &&
                        lb.sao_location_hint == SaoHint::Fplus;
        d << "(0.0245,0.4645)=" << to_string(lb.kind) << "/"
          << to_string(lb.sao_location_hint) << (ok ? " ok; " : " WANT mmo/F+; ");
        out.pass = out.pass && ok;
    }
    {
        const PatternLabel lb = run(0.005, 0.742, 5000.0);
        const bool ok = lb.kind == PatternKind::MMO && lb.quiescent_fraction >= 0.5;
        d << "(0.005,0.742)=" << to_string(lb.kind) << "/quiescent "
          << lb.quiescent_fraction << (ok ? " ok" : " WANT mmo quiescent>=0.5");
        out.pass = out.pass && ok;
    }
    out.detail = d.str();
    return out;
}

// --- AC6: periodic-orbit continuation, torus and period-doubling -----------
Outcome ac6() {
    Outcome out;
    std::ostringstream d;
    auto leg = [&](double b2_seed, double settle, double to, int segments,
                   int max_points) {
        Params p = Params::preset_paper(0.75, b2_seed);
        ShootingConfig cfg;
        cfg.segments = segments;
        cfg.max_points = max_points;
        State anchor;
        double T = 0.0;
        if (!find_periodic_orbit(p, settle, fallback_start(), cfg, anchor, T))
            return Branch{};
        return continue_periodic(p, "beta2", b2_seed, to, anchor, T, cfg);
    };

    bool tr1 = false, tr2 = false, pd1 = false, pd2 = false;
    bool window_failure = false;

    // (a) upward from just past H1: TR1, then the stiff MMO window
    {
        Branch br = leg(0.0053, 800.0, 0.0075, 4, 150);
        for (const auto& b : br.detected) {
            if (b.kind == BifKind::Torus && within(b.par1, 0.00536, 0.15)) {
                tr1 = true;
                d << "TR1 at " << b.par1 << "; ";
            }
            if (b.kind == BifKind::PeriodDoubling && within(b.par1, 0.0064, 0.15)) {
                pd1 = true;
                d << "PD1 at " << b.par1 << "; ";
            }
        }
        if (br.truncated && !pd1) {
            window_failure = true;
            d << "shooting stalled in the stiff MMO window (" << br.note
              << "), PD1 not reached; ";
        }
    }
    // (b) downward from the spiking regime: TR2
    {
        Branch br = leg(0.045, 300.0, 0.027, 6, 200);
        for (const auto& b : br.detected)
            if (b.kind == BifKind::Torus && within(b.par1, 0.0331, 0.15)) {
                tr2 = true;
                d << "TR2 at " << b.par1 << "; ";
            }
    }
    // (c) upward along the single-spike family: PD2
    {
        Branch br = leg(0.0138, 700.0, 0.016, 20, 50);
        for (const auto& b : br.detected)
            if (b.kind == BifKind::PeriodDoubling && within(b.par1, 0.0155, 0.15)) {
                pd2 = true;
                d << "PD2 at " << b.par1 << "; ";
            }
    }

    if (window_failure) {
        d << "best-effort clause applies: criterion reduced to TR2 and PD2";
        out.pass = tr2 && pd2;
        if (tr1) d << " (TR1 found as well)";
    } else {
        out.pass = tr1 && pd1 && tr2 && pd2;
    }
    out.detail = d.str();
    return out;
}

// --- AC7: two-parameter layer-problem diagram at alpha = 1 -----------------
Outcome ac7() {
    Outcome out;
    const Params p = Params::preset_paper(1.0, 0.01);
    TwoParConfig cfg;
    cfg.trace_snp = false;
    auto diag = fast_subsystem_2par(p, cfg);
    bool bt1 = false, bt2 = false;
    for (const auto& b : diag.bt) {
        if (within(b.par1, 0.023, 0.20) && within(b.par2, -0.294, 0.20)) bt1 = true;
        if (within(b.par1, 0.034, 0.20) && within(b.par2, 0.0003, 0.20)) bt2 = true;
    }
    std::ostringstream d;
    d << diag.bt.size() << " BT points:";
    for (const auto& b : diag.bt) d << " (" << b.par1 << ", " << b.par2 << ")";
    d << "; " << diag.gh.size() << " GH; self-intersection="
      << (diag.hopf_self_intersects ? "yes" : "no");
    out.detail = d.str();
    out.pass = bt1 && bt2 && diag.hopf_self_intersects && diag.gh.size() >= 2;
    return out;
}

// --- AC8: delta-scaling robustness ------------------------------------------
Outcome ac8() {
    Outcome out;
    std::ostringstream d;
    {
        Params p = Params::preset_paper(0.75, 0.01);
        p.delta = std::pow(p.epsilon, 0.75);
        Trajectory tr = simulate(p, fallback_start(), 2500.0, {});
        const PatternLabel lb = classify(tr, {}, &p);
        d << "delta=eps^(3/4) -> " << to_string(lb.kind) << "; ";
        out.pass = out.pass && lb.kind == PatternKind::MMO;
    }
    {
        Params p = Params::preset_paper(0.75, 0.01);
        p.delta = std::pow(p.epsilon, 0.25);
        Trajectory tr = simulate(p, fallback_start(), 1500.0, {});
        const PatternLabel lb = classify(tr, {}, &p);
        d << "delta=eps^(1/4) -> " << to_string(lb.kind);
        out.pass = out.pass && lb.kind == PatternKind::RelaxationOscillation;
    }
    out.detail = d.str();
    return out;
}

// --- AC9: property suites ----------------------------------------------------
Outcome ac9() {
    Outcome out;
    std::ostringstream d;
    std::mt19937 rng(20240817);
    auto uni = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };

    // jacobian vs central finite differences over random states in [0, 1.5]^3
    {
        const Params p = Params::preset_paper(0.75, 0.01);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const State s{uni(1e-3, 1.5), uni(1e-3, 1.5), uni(1e-3, 1.5)};
            const Eigen::Matrix3d J = jacobian(s, p, Frame::Fast);
            for (int j = 0; j < 3; ++j) {
                const double h = 1e-6;
                State sp = s, sm = s;
                (j == 0 ? sp.x : j == 1 ? sp.y : sp.z) += h;
                (j == 0 ? sm.x : j == 1 ? sm.y : sm.z) -= h;
                auto vp = vector_field(sp, p, Frame::Fast);
                auto vm = vector_field(sm, p, Frame::Fast);
                for (int i = 0; i < 3; ++i) {
                    const double fd = (vp[i] - vm[i]) / (2 * h);
                    worst = std::max(worst, std::abs(fd - J(i, j)) /
                                                std::max({1.0, std::abs(fd)}));
                }
            }
        }
        d << "jac-vs-fd " << worst << (worst <= 1e-6 ? " ok; " : " FAIL; ");
        out.pass = out.pass && worst <= 1e-6;
    }

    // frame equivalence: exact scalar factors
    {
        const Params p = Params::preset_paper(0.6, 0.025);
        bool ok = true;
        for (int k = 0; k < 100; ++k) {
            const State s{uni(0, 1.2), uni(0, 1.2), uni(0, 1.2)};
            auto f = vector_field(s, p, Frame::Fast);
            auto fi = vector_field(s, p, Frame::Intermediate);
            auto fs = vector_field(s, p, Frame::Slow);
            for (int i = 0; i < 3; ++i) {
                // exact to floating-point roundoff (a few ulps)
                const double ri = fi[i] * p.epsilon;
                if (std::abs(f[i] - ri) > 1e-18 + 4e-16 * std::abs(f[i])) ok = false;
                const double rs = fs[i] * p.epsilon * p.delta;
                if (std::abs(f[i] - rs) > 1e-18 + 4e-16 * std::abs(f[i])) ok = false;
            }
        }
        d << "frame-scaling" << (ok ? " ok; " : " FAIL; ");
        out.pass = out.pass && ok;
    }

    // invariant coordinate planes preserved by simulation
    {
        const Params p = Params::preset_paper(0.75, 0.01);
        bool ok = true;
        Trajectory tx = simulate(p, {0.0, 0.3, 0.2}, 50.0, {});
        for (const auto& s : tx.u)
            if (s.x != 0.0) ok = false;
        Trajectory ty = simulate(p, {0.5, 0.0, 0.2}, 50.0, {});
        for (const auto& s : ty.u)
            if (s.y != 0.0) ok = false;
        Trajectory tz = simulate(p, {0.5, 0.3, 0.0}, 50.0, {});
        for (const auto& s : tz.u)
            if (s.z != 0.0) ok = false;
        d << "plane-invariance" << (ok ? " ok; " : " FAIL; ");
        out.pass = out.pass && ok;
    }

    // fold parametrization residuals, printed-denominator discrepancy, nu root
    {
        bool ok = true;
        for (auto [b2, a] : {std::pair{0.048, 0.6}, {0.025, 0.6}, {0.005, 0.6},
                             {0.0245, 0.8}}) {
            const Params p = Params::preset_paper(a, b2);
            const FoldCurve fc = fold_parametrization(p);
            if (fc.max_residual > 1e-10) ok = false;
            if (std::abs(fold_nu(0.5 * (1.0 - p.beta1), p)) > 1e-12) ok = false;
        }
        // the misprinted denominator (beta1^3 term) does not satisfy phi_x = 0
        const Params p = Params::preset_paper(0.6, 0.025);
        double printed_worst = 0.0;
        for (int k = 1; k < 100; ++k) {
            const double x = 0.002 + 0.25 * k / 100.0;
            const double B = p.beta2;
            const double q = B + x * x;
            const double z = (1.0 - p.beta1 - 2.0 * x) * q * q /
                             (p.alpha * (std::pow(p.beta1, 3) + 2.0 * B * x -
                                         p.beta1 * x * x));
            const double y = F_surface(x, z, p);
            printed_worst =
                std::max(printed_worst, std::abs(partials({x, y, z}, p).phi_x));
        }
        if (printed_worst < 1e-3) ok = false;  // must disagree, confirming the fix
        d << "fold-identities" << (ok ? " ok; " : " FAIL; ");
        out.pass = out.pass && ok;
    }

    // trivial Floquet multiplier on the spiking cycle
    {
        const Params p = Params::preset_paper(0.6, 0.0245);
        ShootingConfig cfg;
        State anchor;
        double T = 0.0;
        bool ok = find_periodic_orbit(p, 300.0, fallback_start(), cfg, anchor, T);
        if (ok) {
            auto mu = floquet_multipliers(p, anchor, T);
            double best = 1e300;
            for (const auto& m : mu)
                best = std::min(best, std::abs(m - std::complex<double>(1, 0)));
            ok = best <= 1e-6;
            d << "trivial-multiplier err " << best << (ok ? " ok; " : " FAIL; ");
        } else {
            d << "trivial-multiplier FAIL (no orbit); ";
        }
        out.pass = out.pass && ok;
    }

    // funnel points converge to the folded node under the desingularized flow
    {
        const Params p = Params::preset_paper(0.6, 0.005);
        const FoldedSingularity* fn = nullptr;
        auto fs = folded_singularities(p);
        for (const auto& f : fs)
            if (f.kind == FoldedKind::Node) fn = &f;
        bool ok = fn != nullptr;
        if (ok) {
            SingularFunnel fun = strong_canard(*fn, p);
            double xlo = 1e300, xhi = -1e300, zlo = 1e300, zhi = -1e300;
            for (const auto& q : fun.fold_arc) {
                xlo = std::min(xlo, q[0]);
                xhi = std::max(xhi, q[0]);
                zlo = std::min(zlo, q[1]);
                zhi = std::max(zhi, q[1]);
            }
            int tested = 0, reached = 0;
            for (int k = 0; k < 400 && tested < 20; ++k) {
                const double fx = uni(xlo, xhi);
                const double fz = uni(zlo, zhi);
                if (!fun.contains(fx, fz)) continue;
                ++tested;
                OdeSystem sys;
                sys.n = 2;
                sys.rhs = [&p](const double* u, double* f) {
                    auto dd = desingularized_field(u[0], u[1], p,
                                                   DesingLimit::FiniteDelta);
                    f[0] = dd[0];
                    f[1] = dd[1];
                };
                OdeOptions opts;
                opts.rtol = 1e-10;
                opts.atol = 1e-12;
                opts.initial_step = 1e-5;
                std::vector<double> u = {fx, fz};
                double bestd = 1e300;
                auto on_step = [&](const OdeStepRecord& rec) {
                    const double dd =
                        std::hypot(rec.u1[0] - fn->s.x, rec.u1[1] - fn->s.z);
                    bestd = std::min(bestd, dd);
                    return dd > 1e-5;
                };
                integrate_ode(sys, u, 0.0, 4000.0, opts, on_step);
                if (bestd < 1e-4) ++reached;
            }
            ok = tested >= 10 && reached == tested;
            d << "funnel " << reached << "/" << tested << (ok ? " ok" : " FAIL");
        } else {
            d << "funnel FAIL (no folded node)";
        }
        out.pass = out.pass && ok;
    }

    out.detail = d.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::function<Outcome()> crits[] = {ac1, ac2, ac3, ac4, ac5,
                                              ac6, ac7, ac8, ac9};
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (int k = 1; k <= 9; ++k) {
        if (only != 0 && k != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const Outcome o = crits[k - 1]();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::printf("AC%d: %s  [%.1fs]  %s\n", k, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
