#include <doctest.h>

#include <cmath>
#include <random>

#include "triscale/model.hpp"

using namespace triscale;

namespace {
const Params kP75 = Params::preset_paper(0.75, 0.01);

std::mt19937 rng(12345);
double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace

TEST_CASE("nullcline values at reference points") {
    // prey-only equilibrium at carrying capacity
    CHECK(phi(1.0, 0.0, 0.0, kP75) == doctest::Approx(0.0).epsilon(1e-15));
    // the transcritical line x=0, y=beta1 zeroes phi for any z
    for (double z : {0.0, 0.3, 2.0})
        CHECK(phi(0.0, kP75.beta1, z, kP75) == doctest::Approx(0.0).epsilon(1e-15));
    // psi at the origin, alpha=0.6: -0.6*0.35 + 0.4*(1-0.65)
    const Params p6 = Params::preset_paper(0.6, 0.01);
    CHECK(psi(0.0, 0.0, p6) == doctest::Approx(-0.07).epsilon(1e-12));
}

TEST_CASE("vector field frame scaling is exact") {
    const State s{0.31, 0.07, 0.19};
    auto f = vector_field(s, kP75, Frame::Fast);
    auto fi = vector_field(s, kP75, Frame::Intermediate);
    auto fs = vector_field(s, kP75, Frame::Slow);
    for (int i = 0; i < 3; ++i) {
        CHECK(f[i] == doctest::Approx(fi[i] * kP75.epsilon).epsilon(1e-15));
        CHECK(f[i] == doctest::Approx(fs[i] * kP75.epsilon * kP75.delta).epsilon(1e-15));
    }
    // fast frame at (0.5, 0, 0): logistic growth only
    auto g = vector_field({0.5, 0.0, 0.0}, kP75, Frame::Fast);
    CHECK(g[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g[1] == 0.0);
    CHECK(g[2] == 0.0);
}

TEST_CASE("coordinate planes are flow-invariant") {
    for (int k = 0; k < 1000; ++k) {
        const double a = uniform(0.0, 1.5), b = uniform(0.0, 1.5);
        auto fx = vector_field({0.0, a, b}, kP75, Frame::Fast);
        auto fy = vector_field({a, 0.0, b}, kP75, Frame::Fast);
        auto fz = vector_field({a, b, 0.0}, kP75, Frame::Fast);
        CHECK(fx[0] == 0.0);
        CHECK(fy[1] == 0.0);
        CHECK(fz[2] == 0.0);
    }
}

TEST_CASE("jacobian matches central finite differences") {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const State s{uniform(1e-3, 1.5), uniform(1e-3, 1.5), uniform(1e-3, 1.5)};
        const Eigen::Matrix3d J = jacobian(s, kP75, Frame::Fast);
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6;
            State sp = s, sm = s;
            (j == 0 ? sp.x : j == 1 ? sp.y : sp.z) += h;
            (j == 0 ? sm.x : j == 1 ? sm.y : sm.z) -= h;
            auto vp = vector_field(sp, kP75, Frame::Fast);
            auto vm = vector_field(sm, kP75, Frame::Fast);
            for (int i = 0; i < 3; ++i) {
                const double fd = (vp[i] - vm[i]) / (2 * h);
                const double scale = std::max({1.0, std::abs(fd), std::abs(J(i, j))});
                worst = std::max(worst, std::abs(fd - J(i, j)) / scale);
            }
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("jacobian at the prey-only state and frame scaling") {
    // d(x phi)/dx at (1,0,0) is the logistic decay rate at carrying capacity
    const Eigen::Matrix3d J = jacobian({1.0, 0.0, 0.0}, kP75, Frame::Fast);
    CHECK(J(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    const Eigen::Matrix3d Ji = jacobian({1.0, 0.0, 0.0}, kP75, Frame::Intermediate);
    CHECK((J - kP75.epsilon * Ji).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("higher partials match finite differences of phi") {
    const Params p = Params::preset_paper(0.6, 0.005);
    const State s{0.3, 0.12, 0.25};
    const Partials d = partials(s, p);
    const double h = 1e-4;
    auto ph = [&](double x) { return phi(x, s.y, s.z, p); };
    const double fd_xx = (ph(s.x + h) - 2 * ph(s.x) + ph(s.x - h)) / (h * h);
    const double fd_xxx =
        (ph(s.x + 2 * h) - 2 * ph(s.x + h) + 2 * ph(s.x - h) - ph(s.x - 2 * h)) /
        (2 * h * h * h);
    CHECK(d.phi_xx == doctest::Approx(fd_xx).epsilon(1e-6));
    CHECK(d.phi_xxx == doctest::Approx(fd_xxx).epsilon(1e-3));
    const double fd_xy =
        (phi(s.x + h, s.y + h, s.z, p) - phi(s.x + h, s.y - h, s.z, p) -
         phi(s.x - h, s.y + h, s.z, p) + phi(s.x - h, s.y - h, s.z, p)) /
        (4 * h * h);
    CHECK(d.phi_xy == doctest::Approx(fd_xy).epsilon(1e-6));
}

TEST_CASE("equilibria: boundary states always present, residuals tiny") {
    for (double b2 : {0.005, 0.01, 0.048}) {
        const Params p = Params::preset_paper(0.75, b2);
        auto eqs = equilibria(p);
        bool origin = false, prey = false;
        for (const auto& e : eqs) {
            if (e.kind == EquilibriumKind::Origin) origin = true;
            if (e.kind == EquilibriumKind::PreyOnly) prey = true;
            CHECK(e.residual <= 1e-10);
        }
        CHECK(origin);
        CHECK(prey);
    }
}

TEST_CASE("equilibria: unique interior state at the MMO benchmark (frozen oracle)") {
    // brute-force oracle: dense-grid bracketing of psi(x, G(x)) confirmed one
    // root; values frozen from the bisection refinement
    const Params p = Params::preset_paper(0.75, 0.01);
    std::vector<Equilibrium> stars;
    for (const auto& e : equilibria(p))
        if (e.kind == EquilibriumKind::Coexistent) stars.push_back(e);
    REQUIRE(stars.size() == 1);
    CHECK(stars[0].s.x == doctest::Approx(0.09129433464000469).epsilon(1e-9));
    CHECK(stars[0].s.y == doctest::Approx(0.07981594278786475).epsilon(1e-9));
    CHECK(stars[0].s.z == doctest::Approx(0.13160108977302148).epsilon(1e-9));
}

TEST_CASE("E_xz is unstable across beta2 at alpha=0.75") {
    for (int k = 0; k < 100; ++k) {
        const double b2 = 0.002 + (0.9 - 0.002) * k / 99.0;
        const Params p = Params::preset_paper(0.75, b2);
        for (const auto& e : equilibria(p)) {
            if (e.kind != EquilibriumKind::Exz) continue;
            double max_re = -1e300;
            for (const auto& ev : e.eigenvalues) max_re = std::max(max_re, ev.real());
            CHECK(max_re > 0.0);
        }
    }
}
