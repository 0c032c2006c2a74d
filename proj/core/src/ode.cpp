#include "triscale/ode.hpp"

#include <algorithm>
#include <cmath>

namespace triscale {

void OdeStepRecord::eval(double t, double* out) const {
    const double h = t1 - t0;
    const double th = (t - t0) / h;
    const double a = th * (th - 1.0);
    const double b = 1.0 - 2.0 * th;
    for (size_t i = 0; i < u0.size(); ++i) {
        const double d = u1[i] - u0[i];
        out[i] = (1.0 - th) * u0[i] + th * u1[i]
               + a * (b * d + (th - 1.0) * h * f0[i] + th * h * f1[i]);
    }
}

void OdeStepRecord::eval_deriv(double t, double* out) const {
    const double h = t1 - t0;
    const double th = (t - t0) / h;
    for (size_t i = 0; i < u0.size(); ++i) {
        const double d = u1[i] - u0[i];
        // derivative of the cubic Hermite basis w.r.t. t
        const double ddth = d
            + (2.0 * th - 1.0) * ((1.0 - 2.0 * th) * d + (th - 1.0) * h * f0[i] + th * h * f1[i])
            + th * (th - 1.0) * (-2.0 * d + h * f0[i] + h * f1[i]);
        out[i] = ddth / h;
    }
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = kB1 - 5179.0 / 57600, kE3 = kB3 - 7571.0 / 16695,
                 kE4 = kB4 - 393.0 / 640, kE5 = kB5 + 92097.0 / 339200,
                 kE6 = kB6 - 187.0 / 2100, kE7 = -1.0 / 40;

struct Radau {
    // Radau IIA, s = 3, order 5: c = ((4-sqrt6)/10, (4+sqrt6)/10, 1),
    // A from collocation of the Lagrange basis at c.
    double c[3];
    double A[3][3];
    Radau() {
        const double s6 = std::sqrt(6.0);
        c[0] = (4.0 - s6) / 10.0;
        c[1] = (4.0 + s6) / 10.0;
        c[2] = 1.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double ca = c[(j + 1) % 3], cb = c[(j + 2) % 3];
                const double den = (c[j] - ca) * (c[j] - cb);
                const double X = c[i];
                A[i][j] = (X * X * X / 3.0 - (ca + cb) * X * X / 2.0 + ca * cb * X) / den;
            }
        }
    }
};

const Radau& radau() {
    static const Radau tab;
    return tab;
}

double scaled_norm(const std::vector<double>& err, const std::vector<double>& y0,
                   const std::vector<double>& y1, double rtol, double atol) {
    double s = 0.0;
    for (size_t i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        s += q * q;
    }
    return std::sqrt(s / err.size());
}

class Dopri5 {
  public:
    explicit Dopri5(const OdeSystem& sys) : sys_(sys), n_(sys.n) {
        for (auto& k : k_) k.resize(n_);
        tmp_.resize(n_);
    }

    // Attempts one step of size h from (t, u) with derivative f0 = k1.
    // On success fills u1, f1 and the error estimate.
    void step(const std::vector<double>& u, double h, std::vector<double>& u1,
              std::vector<double>& f1, std::vector<double>& err) {
        auto& k = k_;
        auto stage = [&](double a1, double a2, double a3, double a4, double a5, int m) {
            for (int i = 0; i < n_; ++i) {
                double acc = a1 * k[0][i];
                if (a2 != 0.0) acc += a2 * k[1][i];
                if (a3 != 0.0) acc += a3 * k[2][i];
                if (a4 != 0.0) acc += a4 * k[3][i];
                if (a5 != 0.0) acc += a5 * k[4][i];
                tmp_[i] = u[i] + h * acc;
            }
            sys_.rhs(tmp_.data(), k[m].data());
        };
        stage(kA21, 0, 0, 0, 0, 1);
        stage(kA31, kA32, 0, 0, 0, 2);
        stage(kA41, kA42, kA43, 0, 0, 3);
        stage(kA51, kA52, kA53, kA54, 0, 4);
        stage(kA61, kA62, kA63, kA64, kA65, 5);
        u1.resize(n_);
        for (int i = 0; i < n_; ++i)
            u1[i] = u[i] + h * (kB1 * k[0][i] + kB3 * k[2][i] + kB4 * k[3][i] +
                                kB5 * k[4][i] + kB6 * k[5][i]);
        f1.resize(n_);
        sys_.rhs(u1.data(), f1.data());
        err.resize(n_);
        for (int i = 0; i < n_; ++i)
            err[i] = h * (kE1 * k[0][i] + kE3 * k[2][i] + kE4 * k[3][i] +
                          kE5 * k[4][i] + kE6 * k[5][i] + kE7 * f1[i]);
    }

    std::vector<double>& f0() { return k_[0]; }

  private:
    const OdeSystem& sys_;
    int n_;
    std::vector<double> k_[6];
    std::vector<double> tmp_;
};

class Radau5 {
  public:
    explicit Radau5(const OdeSystem& sys) : sys_(sys), n_(sys.n) {}

    // One implicit step y0 -> y1 with frozen-Jacobian simplified Newton.
    bool step(const std::vector<double>& u, double h, std::vector<double>& u1) {
        const auto& tab = radau();
        const int N = 3 * n_;
        Eigen::MatrixXd J(n_, n_);
        jac_at(u, J);
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
        for (int bi = 0; bi < 3; ++bi)
            for (int bj = 0; bj < 3; ++bj)
                M.block(bi * n_, bj * n_, n_, n_) -= h * tab.A[bi][bj] * J;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);

        Eigen::VectorXd Z = Eigen::VectorXd::Zero(N);
        std::vector<double> yi(n_), fi(n_);
        Eigen::VectorXd G(N);
        double prev_norm = -1.0;
        for (int it = 0; it < 20; ++it) {
            Eigen::VectorXd F(N);
            for (int s = 0; s < 3; ++s) {
                for (int i = 0; i < n_; ++i) yi[i] = u[i] + Z(s * n_ + i);
                sys_.rhs(yi.data(), fi.data());
                for (int i = 0; i < n_; ++i) F(s * n_ + i) = fi[i];
            }
            for (int s = 0; s < 3; ++s)
                for (int i = 0; i < n_; ++i) {
                    double acc = 0.0;
                    for (int q = 0; q < 3; ++q) acc += tab.A[s][q] * F(q * n_ + i);
                    G(s * n_ + i) = Z(s * n_ + i) - h * acc;
                }
            Eigen::VectorXd dZ = lu.solve(-G);
            Z += dZ;
            const double nrm = dZ.norm() / std::sqrt(static_cast<double>(N));
            if (!std::isfinite(nrm)) return false;
            if (nrm < newton_tol_) break;
            if (prev_norm >= 0.0 && nrm > 2.0 * prev_norm && it > 2) return false;
            prev_norm = nrm;
            if (it == 19) return false;
        }
        u1.resize(n_);
        for (int i = 0; i < n_; ++i) u1[i] = u[i] + Z(2 * n_ + i);
        for (int i = 0; i < n_; ++i)
            if (!std::isfinite(u1[i])) return false;
        return true;
    }

    void set_newton_tol(double t) { newton_tol_ = t; }

  private:
    void jac_at(const std::vector<double>& u, Eigen::MatrixXd& J) {
        if (sys_.jac) {
            std::vector<double> buf(n_ * n_);
            sys_.jac(u.data(), buf.data());
            for (int j = 0; j < n_; ++j)
                for (int i = 0; i < n_; ++i) J(i, j) = buf[j * n_ + i];
        } else {
            std::vector<double> up(u), f0(n_), f1(n_);
            sys_.rhs(u.data(), f0.data());
            for (int j = 0; j < n_; ++j) {
                const double h = std::max(1e-8, 1e-8 * std::abs(u[j]));
                up[j] = u[j] + h;
                sys_.rhs(up.data(), f1.data());
                up[j] = u[j];
                for (int i = 0; i < n_; ++i) J(i, j) = (f1[i] - f0[i]) / h;
            }
        }
    }

    const OdeSystem& sys_;
    int n_;
    double newton_tol_ = 1e-12;
};

}  // namespace

OdeResult integrate_ode(const OdeSystem& sys, std::vector<double>& u,
                        double t0, double t1, const OdeOptions& opts,
                        const std::function<bool(const OdeStepRecord&)>& on_step) {
    OdeResult res;
    const int n = sys.n;
    const double span = t1 - t0;
    if (span <= 0.0) return res;

    const bool fixed = opts.fixed_step > 0.0;
    double h = fixed ? opts.fixed_step : opts.initial_step;
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
    h = std::min(h, span);

    Dopri5 rk(sys);
    Radau5 radau5(sys);
    radau5.set_newton_tol(0.01 * std::min(opts.rtol, 1e-6));

    double t = t0;
    std::vector<double> u1(n), f1(n), err(n), umid(n);
    OdeStepRecord rec;
    rec.u0.resize(n); rec.u1.resize(n); rec.f0.resize(n); rec.f1.resize(n);

    std::vector<double> f0(n);
    sys.rhs(u.data(), f0.data());

    const bool use_radau = opts.scheme == OdeScheme::Radau;

    while (t < t1) {
        if (res.n_steps + res.n_rejected > opts.max_steps) {
            res.ok = false;
            res.message = "step budget exhausted";
            return res;
        }
        h = std::min(h, t1 - t);
        bool accept = false;
        double err_norm = 0.0;

        if (!use_radau) {
            rk.f0() = f0;
            rk.step(u, h, u1, f1, err);
            err_norm = fixed ? 0.0 : scaled_norm(err, u, u1, opts.rtol, opts.atol);
            accept = fixed || err_norm <= 1.0;
        } else {
            bool ok_full = radau5.step(u, h, umid);  // umid: full-step result (reused)
            std::vector<double> yh(n);
            bool ok_half = false;
            if (fixed) {
                accept = ok_full;
                u1 = umid;
            } else if (ok_full) {
                std::vector<double> ymid2(n);
                ok_half = radau5.step(u, 0.5 * h, ymid2) && radau5.step(ymid2, 0.5 * h, yh);
                if (ok_half) {
                    for (int i = 0; i < n; ++i) err[i] = (yh[i] - umid[i]) / 31.0;
                    err_norm = scaled_norm(err, u, yh, opts.rtol, opts.atol);
                    accept = err_norm <= 1.0;
                    u1 = yh;
                }
            }
            if (accept) sys.rhs(u1.data(), f1.data());
            if (!ok_full || (!fixed && !ok_half)) {
                // Newton failure: treat as a rejected step
                accept = false;
                err_norm = 4.0;
            }
        }

        if (accept && opts.admissible && !opts.admissible(u1.data())) {
            accept = false;
            err_norm = 0.0;  // force plain halving below
        }

        if (accept) {
            if (opts.project && opts.project(u.data(), u1.data()))
                sys.rhs(u1.data(), f1.data());
            rec.t0 = t;
            rec.t1 = t + h;
            rec.u0 = u;
            rec.u1 = u1;
            rec.f0 = f0;
            rec.f1 = f1;
            t += h;
            u = u1;
            f0 = f1;
            ++res.n_steps;
            if (on_step && !on_step(rec)) return res;
            if (!fixed) {
                const double fac = err_norm > 0.0
                    ? std::clamp(0.9 * std::pow(err_norm, -1.0 / 6.0), 0.2, 5.0)
                    : 5.0;
                h *= fac;
                if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
            }
        } else {
            ++res.n_rejected;
            if (fixed) {
                res.ok = false;
                res.message = "fixed-size step failed";
                return res;
            }
            const double fac = err_norm > 1.0
                ? std::clamp(0.9 * std::pow(err_norm, -1.0 / 6.0), 0.1, 0.7)
                : 0.5;
            h *= fac;
            if (h < opts.min_step) {
                res.ok = false;
                res.message = "step size underflow";
                return res;
            }
        }
    }
    return res;
}

}  // namespace triscale
