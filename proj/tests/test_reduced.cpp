#include <doctest.h>

#include <cmath>

#include "triscale/ode.hpp"
#include "triscale/reduced.hpp"
#include "triscale/rootfind.hpp"

using namespace triscale;

TEST_CASE("double limit: the superslow curves are the equilibrium set") {
    const Params p = Params::preset_paper(0.6, 0.005);
    // on Z (chi = 0) the double-limit field vanishes
    for (int k = 1; k < 40; ++k) {
        const double x = 0.05 + 0.9 * k / 40.0;
        const double z = superslow_G(x, p);
        if (!(z > 0)) continue;
        auto f = desingularized_field(x, z, p, DesingLimit::DoubleLimit);
        CHECK(std::abs(f[0]) <= 1e-10);
        CHECK(f[1] == 0.0);
    }
    // on L (y = 0): F(x, H(x)) = 0, so the field vanishes as well
    for (int k = 1; k < 40; ++k) {
        const double x = 0.05 + 0.9 * k / 40.0;
        const double z = superslow_H(x, p);
        if (!(z > 0)) continue;
        auto f = desingularized_field(x, z, p, DesingLimit::DoubleLimit);
        CHECK(std::abs(f[0]) <= 1e-10);
    }
    // ordinary singularities of the finite-delta flow do NOT persist: a point
    // with psi = 0 on S but chi != 0 is not an equilibrium of the double limit
    {
        const double z = 0.35;
        auto g = [&](double x) { return psi(x, z, p); };
        auto roots = find_roots(g, 1e-3, 1.0, {});
        for (double x : roots) {
            const double y = F_surface(x, z, p);
            if (y <= 0) continue;
            if (std::abs(chi(x, y, p)) < 1e-3) continue;  // too close to Z
            auto f = desingularized_field(x, z, p, DesingLimit::DoubleLimit);
            CHECK(std::abs(f[0]) > 1e-6);
        }
    }
}

TEST_CASE("desingularized flow crosses the fold horizontally") {
    const Params p = Params::preset_paper(0.8, 0.0245);
    for (double x : {0.05, 0.15, 0.3}) {
        const double z = fold_nu(x, p);
        if (!(z > 0)) continue;
        auto f = desingularized_field(x, z, p, DesingLimit::FiniteDelta);
        // dz component = -delta phi_x z psi = 0 on the fold (phi_x = 0)
        CHECK(std::abs(f[1]) <= 1e-12);
    }
}

TEST_CASE("orientation: desingularized flow reverses on repelling sheets") {
    const Params p = Params::preset_paper(0.6, 0.048);
    // the time rescaling negates orbits where phi_x > 0, so the reduced and
    // desingularized x-velocities agree in sign on S^a and disagree on S^r
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        const double x = 0.02 + 0.9 * k / 200.0;
        const double z = 0.05 + 0.4 * (k % 17) / 17.0;
        const double y = F_surface(x, z, p);
        if (y <= 0) continue;
        const Partials d = partials({x, y, z}, p);
        if (std::abs(d.phi_x) < 1e-3) continue;
        auto f = desingularized_field(x, z, p, DesingLimit::FiniteDelta);
        if (f[0] == 0.0) continue;
        const double inner = (f[0] / (-d.phi_x)) * f[0];
        if (d.phi_x < 0)
            CHECK(inner > 0.0);
        else
            CHECK(inner < 0.0);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("folded singularities: counts and residuals at the reference points") {
    // one folded node, one folded saddle, one folded focus
    {
        const Params p = Params::preset_paper(0.6, 0.005);
        auto fs = folded_singularities(p);
        REQUIRE(fs.size() == 3);
        int node = 0, saddle = 0, focus = 0;
        for (const auto& f : fs) {
            CHECK(f.res_phi <= 1e-9);
            CHECK(f.res_phi_x <= 1e-9);
            CHECK(f.res_eq <= 1e-9);
            if (f.kind == FoldedKind::Node) ++node;
            if (f.kind == FoldedKind::Saddle) ++saddle;
            if (f.kind == FoldedKind::Focus) ++focus;
        }
        CHECK(node == 1);
        CHECK(saddle == 1);
        CHECK(focus == 1);
    }
    // two folded nodes among four folded singularities
    {
        const Params p = Params::preset_paper(0.4645, 0.0245);
        auto fs = folded_singularities(p);
        REQUIRE(fs.size() == 4);
        int node = 0;
        for (const auto& f : fs)
            if (f.kind == FoldedKind::Node) ++node;
        CHECK(node == 2);
    }
}

TEST_CASE("folded-singularity counts across the saddle-node curves") {
    // sweeping beta2 at fixed alpha: four singularities left of the first
    // saddle-node curve, two between the curves (a pair coalesces), none
    // beyond the second
    const int n4 = static_cast<int>(
        folded_singularities(Params::preset_paper(0.4645, 0.036)).size());
    const int n2 = static_cast<int>(
        folded_singularities(Params::preset_paper(0.4645, 0.040)).size());
    const int n0 = static_cast<int>(
        folded_singularities(Params::preset_paper(0.6, 0.10)).size());
    CHECK(n4 == 4);
    CHECK(n2 == 2);
    CHECK(n0 == 0);
}

TEST_CASE("funnel membership is stable under gamma re-sampling") {
    const Params p = Params::preset_paper(0.6, 0.005);
    const FoldedSingularity* fn = nullptr;
    auto fs = folded_singularities(p);
    for (const auto& f : fs)
        if (f.kind == FoldedKind::Node) fn = &f;
    REQUIRE(fn != nullptr);
    SingularFunnel fun = strong_canard(*fn, p);
    REQUIRE(fun.gamma.size() > 100);
    SingularFunnel half = fun;
    std::vector<std::array<double, 2>> g2;
    for (size_t i = 0; i < fun.gamma.size(); i += 2) g2.push_back(fun.gamma[i]);
    half.gamma = g2;
    for (int k = 0; k < 50; ++k) {
        const double fx = fn->s.x * (0.3 + 0.05 * k);
        const double fz = fn->s.z * (0.5 + 0.03 * k);
        CHECK(fun.contains(fx, fz) == half.contains(fx, fz));
    }
}

TEST_CASE("strong canard is tangent to the strong eigendirection at the node") {
    const Params p = Params::preset_paper(0.6, 0.005);
    const FoldedSingularity* fn = nullptr;
    auto fs = folded_singularities(p);
    for (const auto& f : fs)
        if (f.kind == FoldedKind::Node) fn = &f;
    REQUIRE(fn != nullptr);
    SingularFunnel fun = strong_canard(*fn, p);
    // locate the gamma samples closest to the node and compare direction
    Eigen::EigenSolver<Eigen::Matrix2d> es(
        desingularized_jacobian(fn->s.x, fn->s.z, p));
    const int is =
        std::abs(es.eigenvalues()(0).real()) > std::abs(es.eigenvalues()(1).real())
            ? 0
            : 1;
    Eigen::Vector2d v = es.eigenvectors().col(is).real().normalized();
    double best = 1e300;
    size_t kbest = 0;
    for (size_t k = 0; k + 1 < fun.gamma.size(); ++k) {
        const double d = std::hypot(fun.gamma[k][0] - fn->s.x,
                                    fun.gamma[k][1] - fn->s.z);
        if (d > 1e-9 && d < best) {
            best = d;
            kbest = k;
        }
    }
    Eigen::Vector2d dir(fun.gamma[kbest][0] - fn->s.x, fun.gamma[kbest][1] - fn->s.z);
    dir.normalize();
    const double angle = std::acos(std::min(1.0, std::abs(dir.dot(v))));
    CHECK(angle <= 1e-4);
}

TEST_CASE("plane flow: monotone decay and entry-exit predictor") {
    const Params p = Params::preset_paper(0.6, 0.01);
    auto pf = plane_flow(0.4, 0.12, p, 400.0);
    for (size_t i = 1; i < pf.y.size(); ++i) CHECK(pf.y[i] <= pf.y[i - 1] + 1e-12);
    CHECK(psi(0.0, 0.0, p) == doctest::Approx(-0.07));
    CHECK(pf.t_tc > 0.0);
    CHECK(pf.exit_found);
    CHECK(pf.t_exit > pf.t_tc);
    CHECK(pf.y_exit < p.beta1);
}

TEST_CASE("delayed-Hopf exit: degenerate entry and monotonicity") {
    const Params p = Params::preset_paper(0.6, 0.005);
    std::vector<double> hx;
    for (const auto& h : hopf_points_fast(p))
        if (h.curve == SuperslowWhich::Z) hx.push_back(h.x);
    REQUIRE(hx.size() == 2);
    const double x_h = hx.front();

    auto d0 = delayed_hopf_exit(x_h, p);
    CHECK(d0.found);
    CHECK(d0.x_exit == doctest::Approx(x_h));

    auto d1 = delayed_hopf_exit(0.045, p);
    auto d2 = delayed_hopf_exit(0.035, p);
    REQUIRE(d1.found);
    REQUIRE(d2.found);
    CHECK(d1.x_exit > x_h);
    CHECK(d2.x_exit > d1.x_exit);
}

TEST_CASE("FSN II curve b: E* sits on the fold along it") {
    const Params base = Params::preset_paper(0.6, 0.01);
    auto curves = fsn2_curves(base, 0.002, 0.06, 0.3, 0.95, 24, 24);
    REQUIRE(!curves.b.empty());
    int checked = 0;
    for (const auto& q : curves.b) {
        Params p = base;
        p.beta2 = q[0];
        p.alpha = q[1];
        // one of the coexistence equilibria sits on the fold (grid-limited)
        double best = 1e300;
        for (const auto& e : equilibria(p)) {
            if (e.kind != EquilibriumKind::Coexistent) continue;
            best = std::min(best, std::abs(partials(e.s, p).phi_x));
        }
        if (best < 1e300) {
            CHECK(best < 0.06);
            ++checked;
        }
        if (checked > 8) break;
    }
    CHECK(checked > 0);
}
