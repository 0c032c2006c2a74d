#include <doctest.h>

#include <cmath>

#include "triscale/fastsub.hpp"

using namespace triscale;

TEST_CASE("layer diagram: S-shaped equilibrium branches and subcritical Hopf") {
    const Params p = Params::preset_paper(0.6, 0.005);
    auto d = fast_subsystem_diagram(p, 1e-3, 0.6, /*continue_cycles=*/false);
    REQUIRE(!d.equilibria.empty());
    int z_pts = 0, l_pts = 0;
    for (const auto& e : d.equilibria) {
        if (e.curve == SuperslowWhich::Z) ++z_pts;
        if (e.curve == SuperslowWhich::L) ++l_pts;
    }
    CHECK(z_pts > 100);
    CHECK(l_pts > 100);
    int sub = 0;
    for (const auto& h : d.hopf)
        if (h.curve == SuperslowWhich::Z && h.subcritical) ++sub;
    CHECK(sub == 2);
    // middle branch consists of saddles (real eigenvalues of opposite sign)
    int saddles = 0;
    for (const auto& e : d.equilibria) {
        if (e.curve != SuperslowWhich::Z || e.branch != SuperslowBranch::Zero)
            continue;
        if (std::abs(e.eig1.imag()) < 1e-12 &&
            e.eig1.real() * e.eig2.real() < 0.0)
            ++saddles;
    }
    CHECK(saddles > 20);
}

TEST_CASE("cycle branch at (0.0245, 0.8): SN_p pair and bistability window") {
    const Params p = Params::preset_paper(0.8, 0.0245);
    auto d = fast_subsystem_diagram(p, 1e-3, 0.5, /*continue_cycles=*/true);
    // the branch born at the lower subcritical Hopf gains stability at one
    // saddle-node of cycles and loses it at another
    bool found = false;
    for (const auto& cb : d.cycles) {
        bool has_stable = false;
        for (const auto& q : cb.points)
            if (q.stable) has_stable = true;
        if (has_stable && cb.snp_z.size() >= 2) found = true;
    }
    CHECK(found);
    // bistability: a stable equilibrium and a stable cycle share a z-window
    CHECK(!d.bistable_z.empty());
    if (!d.bistable_z.empty())
        CHECK(d.bistable_z.front()[1] > d.bistable_z.front()[0]);
}

TEST_CASE("layer Hopf points coincide with the manifold-module values") {
    const Params p = Params::preset_paper(0.6, 0.005);
    auto d = fast_subsystem_diagram(p, 1e-3, 0.6, false);
    auto hp = hopf_points_fast(p);
    for (const auto& h : d.hopf) {
        if (h.curve != SuperslowWhich::Z) continue;
        double best = 1e300;
        for (const auto& g : hp) {
            if (g.curve != SuperslowWhich::Z) continue;
            best = std::min(best,
                            std::hypot(g.x - h.x, g.z - h.z));
        }
        CHECK(best <= 1e-6);
    }
}

TEST_CASE("two-parameter diagram: BT points, GH count, self-intersection") {
    const Params p = Params::preset_paper(1.0, 0.01);
    TwoParConfig cfg;
    cfg.trace_snp = false;
    auto d = fast_subsystem_2par(p, cfg);
    REQUIRE(d.bt.size() >= 2);
    bool bt1 = false, bt2 = false;
    for (const auto& b : d.bt) {
        if (std::abs(b.par1 - 0.023) < 0.006 && std::abs(b.par2 + 0.294) < 0.06)
            bt1 = true;
        if (std::abs(b.par1 - 0.034) < 0.007 && std::abs(b.par2 - 0.0003) < 0.0002)
            bt2 = true;
    }
    CHECK(bt1);
    CHECK(bt2);
    CHECK(d.gh.size() >= 2);
    CHECK(d.hopf_self_intersects);
    CHECK(!d.cusp.empty());
    // nonphysical continuation region is flagged, not dropped
    CHECK(!d.nonphysical.empty());
    // Hopf-curve points respect the trace condition by construction: spot check
    for (size_t i = 0; i < d.hopf.size(); i += 37) {
        Params q = p;
        q.beta2 = d.hopf[i].beta2;
        const double x = d.hopf[i].x;
        const double z = superslow_G(x, q);
        const double y = F_surface(x, z, q);
        const Partials pd = partials({x, y, z}, q);
        CHECK(std::abs(x * pd.phi_x - q.epsilon * q.gamma1 * y) <= 1e-8);
    }
}

TEST_CASE("SN_p curve tracing from a generalized-Hopf point (best effort)") {
    const Params p = Params::preset_paper(1.0, 0.01);
    TwoParConfig cfg;
    cfg.trace_snp = true;
    cfg.snp_steps = 3;
    auto d = fast_subsystem_2par(p, cfg);
    // tracing is best effort; when it succeeds the fold z lies inside the range
    for (const auto& q : d.snp) {
        CHECK(q.z > 0.0);
        CHECK(q.z < 3.0);
    }
}
