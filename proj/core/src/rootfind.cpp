#include "triscale/rootfind.hpp"

#include <cmath>

namespace triscale {

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iter) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if (f(hi) == 0.0) return hi;
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> find_roots(const std::function<double(double)>& f,
                               double lo, double hi, const RootConfig& cfg) {
    std::vector<double> roots;
    if (!(hi > lo)) return roots;
    const double h = (hi - lo) / cfg.grid_n;
    double xp = lo, fp = f(xp);
    for (int i = 1; i <= cfg.grid_n; ++i) {
        const double x = (i == cfg.grid_n) ? hi : lo + i * h;
        const double fx = f(x);
        if (std::isfinite(fp) && std::isfinite(fx)) {
            if (fp == 0.0) {
                if (roots.empty() || xp - roots.back() > h) roots.push_back(xp);
            } else if ((fp > 0.0) != (fx > 0.0)) {
                roots.push_back(bisect(f, xp, x, cfg.tol, cfg.max_iter));
            }
        }
        xp = x;
        fp = fx;
    }
    if (fp == 0.0 && (roots.empty() || hi - roots.back() > h)) roots.push_back(hi);
    return roots;
}

std::vector<double> find_extrema(const std::function<double(double)>& f,
                                 double lo, double hi, const RootConfig& cfg) {
    const double hd = (hi - lo) * 1e-7;
    auto df = [&](double x) { return (f(x + hd) - f(x - hd)) / (2.0 * hd); };
    auto roots = find_roots(df, lo + 2 * hd, hi - 2 * hd, cfg);
    // keep only genuine sign changes of f' (drop inflection touches)
    std::vector<double> out;
    for (double r : roots) {
        const double w = std::max(4 * hd, (hi - lo) / cfg.grid_n);
        if (df(r - w) * df(r + w) < 0.0) out.push_back(r);
    }
    return out;
}

}  // namespace triscale
