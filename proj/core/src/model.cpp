#include "triscale/model.hpp"

#include <algorithm>
#include <cmath>

#include "triscale/rootfind.hpp"

namespace triscale {

const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::Origin: return "origin";
        case EquilibriumKind::PreyOnly: return "prey-only";
        case EquilibriumKind::Exy: return "E_xy";
        case EquilibriumKind::Exz: return "E_xz";
        case EquilibriumKind::Coexistent: return "E*";
        case EquilibriumKind::AxisZ: return "z-axis";
    }
    return "?";
}

Partials partials(const State& s, const Params& p) {
    const double x = s.x, y = s.y, z = s.z;
    const double b1x = p.beta1 + x;
    const double B = p.beta2;
    const double q = B + x * x;
    Partials d;
    d.phi_x = -1.0 + y / (b1x * b1x) - p.alpha * z * (B - x * x) / (q * q);
    d.phi_y = -1.0 / b1x;
    d.phi_z = -p.alpha * x / q;
    d.phi_xx = -2.0 * y / (b1x * b1x * b1x)
             + 2.0 * p.alpha * x * z * (3.0 * B - x * x) / (q * q * q);
    d.phi_xy = 1.0 / (b1x * b1x);
    d.phi_xz = -p.alpha * (B - x * x) / (q * q);
    d.phi_xxx = 6.0 * y / (b1x * b1x * b1x * b1x)
              + 6.0 * p.alpha * z * (B * B - 6.0 * B * x * x + x * x * x * x) / (q * q * q * q);
    d.chi_x = p.beta1 / (b1x * b1x);
    d.chi_y = -p.gamma1;
    d.chi_xx = -2.0 * p.beta1 / (b1x * b1x * b1x);
    d.psi_x = 2.0 * p.alpha * B * x / (q * q);
    const double gz = 1.0 + p.gamma2 * z;
    d.psi_z = -(1.0 - p.alpha) * p.gamma2 / (gz * gz);
    d.psi_zz = 2.0 * (1.0 - p.alpha) * p.gamma2 * p.gamma2 / (gz * gz * gz);
    return d;
}

std::array<double, 3> vector_field(const State& s, const Params& p, Frame f) {
    const double fac = frame_factor(f, p);
    const double fx = s.x * phi(s.x, s.y, s.z, p);
    const double fy = p.epsilon * s.y * chi(s.x, s.y, p);
    const double fz = p.epsilon * p.delta * s.z * psi(s.x, s.z, p);
    return {fac * fx, fac * fy, fac * fz};
}

Eigen::Matrix3d jacobian(const State& s, const Params& p, Frame f) {
    const double fac = frame_factor(f, p);
    const Partials d = partials(s, p);
    const double ph = phi(s.x, s.y, s.z, p);
    const double ch = chi(s.x, s.y, p);
    const double ps = psi(s.x, s.z, p);
    Eigen::Matrix3d J;
    J(0, 0) = ph + s.x * d.phi_x;
    J(0, 1) = s.x * d.phi_y;
    J(0, 2) = s.x * d.phi_z;
    J(1, 0) = p.epsilon * s.y * d.chi_x;
    J(1, 1) = p.epsilon * (ch + s.y * d.chi_y);
    J(1, 2) = 0.0;
    J(2, 0) = p.epsilon * p.delta * s.z * d.psi_x;
    J(2, 1) = 0.0;
    J(2, 2) = p.epsilon * p.delta * (ps + s.z * d.psi_z);
    return fac * J;
}

namespace {

std::array<std::complex<double>, 3> eigvals(const State& s, const Params& p) {
    Eigen::EigenSolver<Eigen::Matrix3d> es(jacobian(s, p, Frame::Fast));
    std::array<std::complex<double>, 3> ev{es.eigenvalues()(0), es.eigenvalues()(1),
                                           es.eigenvalues()(2)};
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() < b.real(); });
    return ev;
}

double residual(const State& s, const Params& p) {
    auto f = vector_field(s, p, Frame::Fast);
    return std::max({std::abs(f[0]), std::abs(f[1] / p.epsilon),
                     std::abs(f[2] / (p.epsilon * p.delta))});
}

// Damped Newton polish of a 1-D root of g.
double polish1d(const std::function<double(double)>& g, double x0, double lo, double hi) {
    double x = x0;
    for (int it = 0; it < 40; ++it) {
        const double h = std::max(1e-9, 1e-7 * std::abs(x));
        const double g0 = g(x);
        const double dg = (g(x + h) - g(x - h)) / (2.0 * h);
        if (dg == 0.0) break;
        double step = -g0 / dg;
        double xn = x + step;
        int halvings = 0;
        while ((xn < lo || xn > hi || !std::isfinite(g(xn)) ||
                std::abs(g(xn)) > std::abs(g0)) && halvings < 20) {
            step *= 0.5;
            xn = x + step;
            ++halvings;
        }
        if (std::abs(xn - x) < 1e-15) { x = xn; break; }
        x = xn;
    }
    return x;
}

}  // namespace

std::vector<Equilibrium> equilibria(const Params& p, const EquilibriumConfig& cfg) {
    std::vector<Equilibrium> out;
    auto push = [&](State s, EquilibriumKind k) {
        for (const auto& e : out) {
            if (std::abs(e.s.x - s.x) < 1e-9 && std::abs(e.s.y - s.y) < 1e-9 &&
                std::abs(e.s.z - s.z) < 1e-9)
                return;
        }
        out.push_back({s, k, eigvals(s, p), residual(s, p)});
    };

    push({0.0, 0.0, 0.0}, EquilibriumKind::Origin);
    push({1.0, 0.0, 0.0}, EquilibriumKind::PreyOnly);

    // z-axis state: psi(0, z) = 0 with x = y = 0.
    {
        const double r = p.delta3 + p.alpha * p.delta2 / std::max(1e-300, 1.0 - p.alpha);
        if (p.alpha < 1.0 && r > 0.0 && r < 1.0) {
            const double z = (1.0 / r - 1.0) / p.gamma2;
            push({0.0, 0.0, z}, EquilibriumKind::AxisZ);
        }
    }

    RootConfig rc;
    rc.grid_n = cfg.grid_n;

    // E_xy: z = 0, y = F(x,0) from phi=0, chi(x,y)=0.
    {
        auto g = [&](double x) {
            const double y = (p.beta1 + x) * (1.0 - x);
            return chi(x, y, p);
        };
        for (double x : find_roots(g, 1e-6, cfg.x_max, rc)) {
            x = polish1d(g, x, 0.0, cfg.x_max);
            const double y = (p.beta1 + x) * (1.0 - x);
            if (y >= 0.0) push({x, y, 0.0}, EquilibriumKind::Exy);
        }
    }

    // E_xz: y = 0, z from phi=0, psi(x,z)=0.
    {
        auto zof = [&](double x) { return (1.0 - x) * (p.beta2 + x * x) / (p.alpha * x); };
        auto g = [&](double x) { return psi(x, zof(x), p); };
        if (p.alpha > 0.0) {
            for (double x : find_roots(g, 1e-4, cfg.x_max, rc)) {
                x = polish1d(g, x, 1e-6, cfg.x_max);
                const double z = zof(x);
                if (z >= 0.0) push({x, 0.0, z}, EquilibriumKind::Exz);
            }
        }
    }

    // E*: y from chi=0, z from phi=0, x root of psi(x, G(x)) = 0.
    {
        auto zof = [&](double x) {
            const double y = std::max(0.0, y_on_z_curve(x, p));
            return (p.beta2 + x * x) * (1.0 - x - y / (p.beta1 + x)) / (p.alpha * x);
        };
        auto g = [&](double x) { return psi(x, zof(x), p); };
        if (p.alpha > 0.0) {
            const double x_tc = p.delta1 * p.beta1 / (1.0 - p.delta1);
            for (double x : find_roots(g, x_tc + 1e-9, cfg.x_max, rc)) {
                x = polish1d(g, x, x_tc, cfg.x_max);
                const double y = y_on_z_curve(x, p);
                const double z = zof(x);
                if (y > 0.0 && z > 0.0) push({x, y, z}, EquilibriumKind::Coexistent);
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.s.x < b.s.x;
    });
    return out;
}

}  // namespace triscale
