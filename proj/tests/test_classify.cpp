#include <doctest.h>

#include <cmath>

#include "triscale/classify.hpp"

using namespace triscale;

namespace {

// synthetic trajectory builder: x(t) given, y/z filled with smooth companions
Trajectory synth(const std::function<double(double)>& xf, double t_end, double dt) {
    Trajectory tr;
    tr.frame = Frame::Intermediate;
    const double h = 1e-5;
    for (double t = 0.0; t <= t_end; t += dt) {
        tr.t.push_back(t);
        tr.u.push_back({xf(t), 0.1, 0.1});
        tr.du.push_back({(xf(t + h) - xf(t - h)) / (2 * h), 0.0, 0.0});
    }
    // events from the sampled derivative sign changes
    for (size_t i = 1; i + 1 < tr.t.size(); ++i) {
        const double d0 = tr.du[i - 1][0], d1 = tr.du[i][0];
        if (d0 > 0 && d1 <= 0)
            tr.events.push_back({tr.t[i], EventKind::XMax, tr.u[i]});
        if (d0 < 0 && d1 >= 0)
            tr.events.push_back({tr.t[i], EventKind::XMin, tr.u[i]});
    }
    return tr;
}

}  // namespace

TEST_CASE("synthetic: steady state") {
    auto tr = synth([](double) { return 0.35; }, 1000.0, 0.1);
    CHECK(classify(tr).kind == PatternKind::SteadyState);
}

TEST_CASE("synthetic: spiking train") {
    // sharp spikes every 10 units, no small oscillations
    auto tr = synth(
        [](double t) {
            const double phase = std::fmod(t, 10.0);
            return 0.05 + 0.7 * std::exp(-8.0 * (phase - 5.0) * (phase - 5.0));
        },
        1000.0, 0.02);
    const PatternLabel lb = classify(tr);
    CHECK(lb.kind == PatternKind::Spiking);
}

TEST_CASE("synthetic: mixed-mode 1^3 signature") {
    // one large spike then three small oscillations per 40-unit period
    auto tr = synth(
        [](double t) {
            const double phase = std::fmod(t, 40.0);
            double v = 0.1 + 0.7 * std::exp(-4.0 * (phase - 5.0) * (phase - 5.0));
            if (phase > 10.0 && phase < 34.0)
                v += 0.02 * std::sin(2.0 * M_PI * (phase - 10.0) / 8.0);
            return v;
        },
        1200.0, 0.02);
    const PatternLabel lb = classify(tr);
    CHECK(lb.kind == PatternKind::MMO);
    REQUIRE(!lb.mmo_signature.empty());
    CHECK(lb.mmo_signature.front()[0] == 1);
    CHECK(lb.mmo_signature.front()[1] == 3);
    CHECK(lb.period == doctest::Approx(40.0).epsilon(0.05));
}

TEST_CASE("synthetic: bursting with three spikes per burst") {
    auto tr = synth(
        [](double t) {
            const double phase = std::fmod(t, 60.0);
            double v = 0.1;
            for (double c : {5.0, 11.0, 17.0})
                v += 0.6 * std::exp(-6.0 * (phase - c) * (phase - c));
            if (phase > 24.0 && phase < 55.0)
                v += 0.015 * std::sin(2.0 * M_PI * (phase - 24.0) / 6.0);
            return v;
        },
        1500.0, 0.02);
    const PatternLabel lb = classify(tr);
    CHECK(lb.kind == PatternKind::Bursting);
    CHECK(lb.spikes_per_burst == 3);
}

TEST_CASE("synthetic: amplitude-modulated spiking reports a torus") {
    // spike train whose amplitude breathes quasi-periodically; the y-section
    // trace is emulated by modulating y as well
    Trajectory tr;
    tr.frame = Frame::Intermediate;
    const double dt = 0.02;
    for (double t = 0.0; t <= 2000.0; t += dt) {
        const double env = 0.25 + 0.12 * std::sin(2.0 * M_PI * t / 97.3);
        const double phase = std::fmod(t, 10.0);
        const double x =
            0.1 + (0.45 + env) * std::exp(-6.0 * (phase - 5.0) * (phase - 5.0));
        const double y = 0.1 + 0.05 * std::sin(2.0 * M_PI * t / 10.0);
        const double z = 0.15 + 0.5 * env;
        tr.t.push_back(t);
        tr.u.push_back({x, y, z});
        tr.du.push_back({0.0, std::cos(2.0 * M_PI * t / 10.0), 0.0});
    }
    for (size_t i = 1; i + 1 < tr.t.size(); ++i) {
        const double a = tr.u[i - 1].x, b = tr.u[i].x, c = tr.u[i + 1].x;
        if (b >= a && b > c) tr.events.push_back({tr.t[i], EventKind::XMax, tr.u[i]});
        if (b <= a && b < c) tr.events.push_back({tr.t[i], EventKind::XMin, tr.u[i]});
    }
    const PatternLabel lb = classify(tr);
    CHECK(lb.kind == PatternKind::AmplitudeModulated);
}

TEST_CASE("classification is invariant to frame rescaling and density doubling") {
    const Params p = Params::preset_paper(0.75, 0.01);
    IntegratorConfig cfg;
    Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 1500.0, cfg);
    const PatternLabel base = classify(tr, {}, &p);
    REQUIRE(base.kind == PatternKind::MMO);

    // uniform time reparametrization (fast frame covers the same dynamics)
    IntegratorConfig fast_cfg;
    fast_cfg.frame = Frame::Fast;
    Trajectory trf = simulate(p, {0.4, 0.1, 0.12}, 1500.0 / p.epsilon, fast_cfg);
    const PatternLabel lbf = classify(trf, {}, &p);
    CHECK(lbf.kind == base.kind);

    // doubling the sampling density of the stored path (re-interpolated)
    Trajectory dd;
    dd.frame = tr.frame;
    for (size_t i = 0; i + 1 < tr.t.size(); ++i) {
        for (int half = 0; half < 2; ++half) {
            const double t = tr.t[i] + 0.5 * half * (tr.t[i + 1] - tr.t[i]);
            dd.t.push_back(t);
            dd.u.push_back(tr.eval(t));
            dd.du.push_back(tr.eval_deriv(t));
        }
    }
    dd.events = tr.events;
    const PatternLabel lbd = classify(dd, {}, &p);
    CHECK(lbd.kind == base.kind);
}

TEST_CASE("MMO signature stable under +-20% amplitude-fraction change") {
    for (auto [b2, a] : {std::pair{0.01, 0.75}, {0.005, 0.6}}) {
        const Params p = Params::preset_paper(a, b2);
        Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 2000.0, {});
        ClassifierThresholds lo, mid, hi;
        lo.sao_lao_amplitude_fraction = 0.16;
        hi.sao_lao_amplitude_fraction = 0.24;
        const PatternLabel l0 = classify(tr, lo, &p);
        const PatternLabel l1 = classify(tr, mid, &p);
        const PatternLabel l2 = classify(tr, hi, &p);
        CHECK(l0.kind == l1.kind);
        CHECK(l2.kind == l1.kind);
        if (l1.kind == PatternKind::MMO && !l1.mmo_signature.empty()) {
            if (!l0.mmo_signature.empty())
                CHECK(l0.mmo_signature.front() == l1.mmo_signature.front());
            if (!l2.mmo_signature.empty())
                CHECK(l2.mmo_signature.front() == l1.mmo_signature.front());
        }
    }
}

TEST_CASE("steady-state labels align with equilibrium stability") {
    // stable-focus regime outside the oscillatory region
    {
        const Params p = Params::preset_paper(0.75, 0.003);
        for (const auto& e : equilibria(p)) {
            if (e.kind != EquilibriumKind::Coexistent) continue;
            Trajectory tr = simulate(
                p, {e.s.x * 1.02 + 1e-3, e.s.y * 1.02 + 1e-3, e.s.z * 1.02 + 1e-3},
                800.0, {});
            CHECK(classify(tr, {}, &p).kind == PatternKind::SteadyState);
        }
    }
    // a static tail near an unstable equilibrium must NOT read as steady
    {
        const Params p = Params::preset_paper(0.742, 0.005);
        Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 5000.0, {});
        CHECK(classify(tr, {}, &p).kind != PatternKind::SteadyState);
    }
}

TEST_CASE("regime map: alpha=0.75 row reproduces the published sequence") {
    const Params base = Params::preset_paper(0.75, 0.01);
    RegimeMapConfig cfg;
    cfg.t_end = 1500.0;
    RegimeMap map = regime_map(
        base, {0.003, 0.0053, 0.01, 0.02, 0.05, 0.08}, {0.75}, cfg);
    REQUIRE(map.cells.size() == 6);
    CHECK(map.cells[0].label.kind == PatternKind::SteadyState);
    // between H1 and TR1 a small stable cycle: hopf-cycle or spiking-like
    CHECK((map.cells[1].label.kind == PatternKind::HopfCycle ||
           map.cells[1].label.kind == PatternKind::AmplitudeModulated ||
           map.cells[1].label.kind == PatternKind::Spiking));
    CHECK(map.cells[2].label.kind == PatternKind::MMO);
    CHECK(map.cells[3].label.kind == PatternKind::Bursting);
    CHECK(map.cells[4].label.kind == PatternKind::Spiking);
    CHECK(map.cells[5].label.kind == PatternKind::SteadyState);
    // steady cells sit outside the Hopf-bounded region
    CHECK(map.cells[0].beta2 < 0.00524);
    CHECK(map.cells[5].beta2 > 0.066);
}
