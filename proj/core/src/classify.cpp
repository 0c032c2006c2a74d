#include "triscale/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace triscale {

const char* to_string(PatternKind k) {
    switch (k) {
        case PatternKind::SteadyState: return "steady-state";
        case PatternKind::HopfCycle: return "hopf-cycle";
        case PatternKind::RelaxationOscillation: return "relaxation";
        case PatternKind::MMO: return "mmo";
        case PatternKind::Bursting: return "bursting";
        case PatternKind::Spiking: return "spiking";
        case PatternKind::AmplitudeModulated: return "amplitude-modulated";
    }
    return "?";
}

const char* to_string(SaoHint h) {
    switch (h) {
        case SaoHint::F0: return "F0";
        case SaoHint::Fplus: return "F+";
        case SaoHint::Fminus: return "F-";
        case SaoHint::None: return "none";
    }
    return "?";
}

namespace {

struct Peak {
    double t;
    double x;
    double excursion;  // peak-to-trough (larger of the two sides)
    double t_prev_min, t_next_min;  // bracketing x-minimum events
    bool large;
};

struct Analysis {
    double t0, t1;          // analysis window
    double x_lo, x_hi;      // global range in the window
    std::vector<Peak> peaks;
    std::vector<double> window_t;
    std::vector<double> window_x;
};

Analysis analyze(const Trajectory& traj, const ClassifierThresholds& th) {
    Analysis a;
    const double span = traj.t_end() - traj.t_begin();
    a.t0 = traj.t_begin() + 0.4 * span;
    a.t1 = traj.t_end();

    a.x_lo = 1e300;
    a.x_hi = -1e300;
    for (size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] < a.t0) continue;
        a.window_t.push_back(traj.t[i]);
        a.window_x.push_back(traj.u[i].x);
        a.x_lo = std::min(a.x_lo, traj.u[i].x);
        a.x_hi = std::max(a.x_hi, traj.u[i].x);
    }

    // pair XMax events with neighboring XMin events for excursion sizes
    std::vector<const Event*> evs;
    for (const auto& e : traj.events) {
        if (e.t < a.t0) continue;
        if (e.kind == EventKind::XMax || e.kind == EventKind::XMin)
            evs.push_back(&e);
    }
    for (size_t i = 0; i < evs.size(); ++i) {
        if (evs[i]->kind != EventKind::XMax) continue;
        double prev_min = a.x_lo, next_min = a.x_lo;
        double t_prev = evs[i]->t, t_next = evs[i]->t;
        bool have_prev = false, have_next = false;
        for (size_t j = i; j-- > 0;) {
            if (evs[j]->kind == EventKind::XMin) {
                prev_min = evs[j]->s.x;
                t_prev = evs[j]->t;
                have_prev = true;
                break;
            }
        }
        for (size_t j = i + 1; j < evs.size(); ++j) {
            if (evs[j]->kind == EventKind::XMin) {
                next_min = evs[j]->s.x;
                t_next = evs[j]->t;
                have_next = true;
                break;
            }
        }
        if (!have_prev && !have_next) continue;
        const double exc = std::max(have_prev ? evs[i]->s.x - prev_min : 0.0,
                                    have_next ? evs[i]->s.x - next_min : 0.0);
        if (exc < th.spike_prominence) continue;  // numerical noise
        Peak pk;
        pk.t = evs[i]->t;
        pk.x = evs[i]->s.x;
        pk.excursion = exc;
        pk.t_prev_min = t_prev;
        pk.t_next_min = t_next;
        pk.large = false;
        a.peaks.push_back(pk);
    }
    const double range = a.x_hi - a.x_lo;
    for (auto& pk : a.peaks)
        pk.large = pk.excursion >= th.sao_lao_amplitude_fraction * range;
    return a;
}

// section-crossing points of the stored trajectory against plane y = c
std::vector<std::array<double, 2>> y_section_xz(const Trajectory& traj, double c,
                                                double t0) {
    std::vector<std::array<double, 2>> pts;
    for (size_t i = 1; i < traj.t.size(); ++i) {
        if (traj.t[i] < t0) continue;
        const double g0 = traj.u[i - 1].y - c;
        const double g1 = traj.u[i].y - c;
        if (g0 == 0.0 || (g0 > 0) == (g1 > 0) || g1 > g0) continue;  // downward only
        double lo = traj.t[i - 1], hi = traj.t[i];
        for (int k = 0; k < 50 && hi - lo > 1e-9; ++k) {
            const double tm = 0.5 * (lo + hi);
            const double gm = traj.eval(tm).y - c;
            if ((gm > 0) == (g0 > 0))
                lo = tm;
            else
                hi = tm;
        }
        const State s = traj.eval(0.5 * (lo + hi));
        pts.push_back({s.x, s.z});
    }
    return pts;
}

// torus test: crossings fill a closed curve (radial spread with shrinking gaps)
bool torus_test(const std::vector<std::array<double, 2>>& pts) {
    if (pts.size() < 24) return false;
    double cx = 0, cz = 0;
    for (const auto& q : pts) {
        cx += q[0];
        cz += q[1];
    }
    cx /= pts.size();
    cz /= pts.size();
    double var = 0.0;
    std::vector<double> r(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        const double dx = pts[i][0] - cx, dz = pts[i][1] - cz;
        r[i] = std::hypot(dx, dz);
    }
    const double rbar = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
    for (double ri : r) var += (ri - rbar) * (ri - rbar);
    const double rstd = std::sqrt(var / r.size());
    if (rstd < 1e-4 || rbar <= 0.0) return false;  // a point cluster: periodic

    // nearest-neighbor gaps shrink as more crossings accumulate
    auto nn_max = [&](size_t n) {
        double worst = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = 1e300;
            for (size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double d = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
                best = std::min(best, d);
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    const double g_half = nn_max(pts.size() / 2);
    const double g_full = nn_max(pts.size());
    return g_full < 0.9 * g_half && g_full < 0.5 * rbar;
}

struct Grouping {
    std::vector<std::vector<size_t>> groups;  // indices of LAO peaks per group
    std::vector<int> saos_after;              // SAO count between group k and k+1
};

Grouping group_laos(const Analysis& a, const ClassifierThresholds& th) {
    Grouping g;
    std::vector<size_t> lao_idx;
    for (size_t i = 0; i < a.peaks.size(); ++i)
        if (a.peaks[i].large) lao_idx.push_back(i);
    if (lao_idx.empty()) return g;

    std::vector<size_t> cur = {lao_idx[0]};
    auto saos_between = [&](size_t i0, size_t i1) {
        int n = 0;
        for (size_t i = i0 + 1; i < i1; ++i)
            if (!a.peaks[i].large) ++n;
        return n;
    };
    for (size_t k = 1; k < lao_idx.size(); ++k) {
        const size_t prev = lao_idx[k - 1], curn = lao_idx[k];
        const double gap = a.peaks[curn].t - a.peaks[prev].t;
        const bool sao_between = saos_between(prev, curn) > 0;
        if (!sao_between && gap <= th.burst_quiescence_gap) {
            cur.push_back(curn);
        } else {
            g.groups.push_back(cur);
            g.saos_after.push_back(saos_between(prev, curn));
            cur = {curn};
        }
    }
    g.groups.push_back(cur);
    g.saos_after.push_back(0);
    return g;
}

}  // namespace

PatternLabel classify(const Trajectory& traj, const ClassifierThresholds& th,
                      const Params* params) {
    PatternLabel out;
    if (traj.t.size() < 4) {
        out.detail = "trajectory too short";
        return out;
    }
    Analysis a = analyze(traj, th);
    const double range = a.x_hi - a.x_lo;

    // steady state: terminal x-range collapses; cross-checked against the
    // stability of the nearest equilibrium (slow passages near an unstable
    // state hold x nearly constant for long stretches)
    {
        double lo = 1e300, hi = -1e300;
        const double t_tail = a.t1 - 0.1 * (a.t1 - a.t0);
        for (size_t i = 0; i < a.window_t.size(); ++i) {
            if (a.window_t[i] < t_tail) continue;
            lo = std::min(lo, a.window_x[i]);
            hi = std::max(hi, a.window_x[i]);
        }
        if (hi - lo <= th.steady_range) {
            bool confirmed = true;
            if (params) {
                const State fin = traj.u.back();
                double best = 1e300;
                for (const auto& e : equilibria(*params)) {
                    const double d = std::hypot(std::hypot(e.s.x - fin.x, e.s.y - fin.y),
                                                e.s.z - fin.z);
                    if (d < best) {
                        best = d;
                        confirmed = true;
                        for (const auto& ev : e.eigenvalues)
                            if (ev.real() >= 0.0) confirmed = false;
                    }
                }
            }
            if (confirmed) {
                out.kind = PatternKind::SteadyState;
                return out;
            }
            out.detail = "static tail near an unstable equilibrium";
        }
    }

    Grouping g = group_laos(a, th);
    int n_sao = 0;
    for (const auto& pk : a.peaks)
        if (!pk.large) ++n_sao;

    if (g.groups.empty()) {
        // oscillation without large excursions cannot occur (the largest
        // excursion defines the range); treat as small cycle for safety
        out.kind = PatternKind::HopfCycle;
        return out;
    }

    // dominant period: anchors are groups that follow an SAO/quiescent epoch
    // (every group when there are none), so alternating short/long gaps inside
    // one period do not masquerade as the period itself
    std::vector<double> anchors;
    for (size_t k = 0; k < g.groups.size(); ++k) {
        const bool after_epoch = k == 0 || g.saos_after[k - 1] > 0 ||
                                 a.peaks[g.groups[k].front()].t -
                                         a.peaks[g.groups[k - 1].back()].t >
                                     3.0 * th.burst_quiescence_gap;
        if (after_epoch) anchors.push_back(a.peaks[g.groups[k].front()].t);
    }
    if (anchors.size() > 1) {
        std::vector<double> gaps;
        for (size_t i = 1; i < anchors.size(); ++i)
            gaps.push_back(anchors[i] - anchors[i - 1]);
        std::sort(gaps.begin(), gaps.end());
        out.period = gaps[gaps.size() / 2];
    }

    // quiescent fraction: share of the anchored span outside LAO excursions
    if (anchors.size() > 1) {
        const double span = anchors.back() - anchors.front();
        double lao_time = 0.0;
        for (const auto& grp : g.groups) {
            for (size_t idx : grp) {
                const Peak& pk = a.peaks[idx];
                if (pk.t < anchors.front() || pk.t >= anchors.back()) continue;
                // clamp one-sided brackets: a quiet stretch without events
                // before (or after) the spike is not excursion time
                double before = pk.t - pk.t_prev_min;
                double after = pk.t_next_min - pk.t;
                if (after > 0.0 && before > 10.0 * after) before = after;
                if (before > 0.0 && after > 10.0 * before) after = before;
                lao_time += before + after;
            }
        }
        if (span > 0.0)
            out.quiescent_fraction = std::clamp(1.0 - lao_time / span, 0.0, 1.0);
    }

    int max_group = 0;
    for (const auto& grp : g.groups)
        max_group = std::max(max_group, static_cast<int>(grp.size()));

    if (n_sao > 0 && params) {
        // two-timescale relaxation also shows transient spiral-in wiggles;
        // genuine MMO/bursting SAOs ride the superslow curve for a
        // substantial share of the period
        double t_att = 0.0, t_tot = 0.0;
        for (size_t i = 1; i < traj.t.size(); ++i) {
            if (traj.t[i] < a.t0) continue;
            const double dt = traj.t[i] - traj.t[i - 1];
            t_tot += dt;
            const State& s = traj.u[i];
            if (std::abs(chi(s.x, s.y, *params)) < 0.02 &&
                std::abs(phi(s.x, s.y, s.z, *params)) < 0.02)
                t_att += dt;
        }
        if (t_tot > 0.0 && t_att / t_tot < th.superslow_attachment_min) {
            out.kind = PatternKind::RelaxationOscillation;
            out.runner_up = PatternKind::Spiking;
            out.detail = "small oscillations without superslow attachment";
            return out;
        }
    }

    if (n_sao > 0) {
        // mixed large/small oscillations: MMO or bursting by group size
        if (max_group >= 2) {
            out.kind = PatternKind::Bursting;
            out.spikes_per_burst = max_group;
        } else {
            out.kind = PatternKind::MMO;
        }
        // signature over one period: (L_k, s_k) pairs
        for (size_t k = 0; k + 1 < g.groups.size(); ++k) {
            out.mmo_signature.push_back(
                {static_cast<int>(g.groups[k].size()), g.saos_after[k]});
            if (out.mmo_signature.size() >= 8) break;
        }
        if (out.mmo_signature.empty() && !g.groups.empty())
            out.mmo_signature.push_back({static_cast<int>(g.groups[0].size()), n_sao});
        out.runner_up = max_group >= 2 ? PatternKind::MMO : PatternKind::Bursting;
        return out;
    }

    // pure large-amplitude train: torus first (modulated spike amplitudes and
    // return-map points filling a closed curve), then spiking / relaxation /
    // small cycle
    {
        double med_y;
        {
            std::vector<double> ys;
            for (size_t i = 0; i < traj.t.size(); ++i)
                if (traj.t[i] >= a.t0) ys.push_back(traj.u[i].y);
            std::sort(ys.begin(), ys.end());
            med_y = ys.empty() ? 0.0 : ys[ys.size() / 2];
        }
        auto pts = y_section_xz(traj, med_y, a.t0);
        if (torus_test(pts)) {
            out.kind = PatternKind::AmplitudeModulated;
            out.detail = "poincare crossings fill a closed curve";
            return out;
        }
    }

    // slow/fast split: time spent below a derivative threshold
    double t_slow = 0.0, t_total = 0.0;
    {
        std::vector<double> speed(a.window_t.size(), 0.0);
        double vmax = 0.0;
        for (size_t i = 1; i < a.window_t.size(); ++i) {
            const double dt = a.window_t[i] - a.window_t[i - 1];
            if (dt <= 0) continue;
            speed[i] = std::abs(a.window_x[i] - a.window_x[i - 1]) / dt;
            vmax = std::max(vmax, speed[i]);
        }
        for (size_t i = 1; i < a.window_t.size(); ++i) {
            const double dt = a.window_t[i] - a.window_t[i - 1];
            t_total += dt;
            if (speed[i] < 0.02 * vmax) t_slow += dt;
        }
    }
    const double ratio = t_slow / std::max(1e-300, t_total - t_slow);

    // duty cycle: fraction above midline
    double t_above = 0.0;
    const double mid = 0.5 * (a.x_lo + a.x_hi);
    for (size_t i = 1; i < a.window_t.size(); ++i) {
        if (a.window_x[i] > mid) t_above += a.window_t[i] - a.window_t[i - 1];
    }
    const double duty = t_above / std::max(1e-300, t_total);

    if (ratio >= th.relaxation_time_ratio) {
        out.kind = PatternKind::RelaxationOscillation;
        out.runner_up = PatternKind::Spiking;
    } else if (duty > 0.35 && range < 0.25) {
        out.kind = PatternKind::HopfCycle;
        out.runner_up = PatternKind::Spiking;
    } else {
        out.kind = PatternKind::Spiking;
        out.runner_up = ratio > 0.5 * th.relaxation_time_ratio
                            ? PatternKind::RelaxationOscillation
                            : PatternKind::HopfCycle;
    }
    return out;
}

SaoHint sao_locator(const Trajectory& traj, const FoldCurve& fc,
                    const ClassifierThresholds& th) {
    Analysis a = analyze(traj, th);
    std::vector<std::array<double, 2>> sao_xz;
    for (const auto& pk : a.peaks) {
        if (pk.large) continue;
        const State s = traj.eval(pk.t);
        sao_xz.push_back({s.x, s.z});
    }
    if (sao_xz.empty()) return SaoHint::None;

    auto branch_dist = [&](const FoldArc& arc, double x, double z) {
        double best = 1e300;
        for (const auto& q : arc.pts) {
            const double d = std::hypot(q[0] - x, q[2] - z);
            best = std::min(best, d);
        }
        return best;
    };
    int votes[3] = {0, 0, 0};
    for (const auto& q : sao_xz) {
        double best = 1e300;
        int who = -1;
        for (const auto& arc : fc.branches) {
            if (arc.pts.empty()) continue;
            const double d = branch_dist(arc, q[0], q[1]);
            if (d < best) {
                best = d;
                who = static_cast<int>(arc.label);
            }
        }
        if (who >= 0) ++votes[who];
    }
    const int imax = static_cast<int>(
        std::max_element(votes, votes + 3) - votes);
    if (votes[imax] == 0) return SaoHint::None;
    switch (static_cast<FoldBranch>(imax)) {
        case FoldBranch::Fminus: return SaoHint::Fminus;
        case FoldBranch::F0: return SaoHint::F0;
        case FoldBranch::Fplus: return SaoHint::Fplus;
    }
    return SaoHint::None;
}

RegimeMap regime_map(const Params& base, const std::vector<double>& beta2s,
                     const std::vector<double>& alphas, const RegimeMapConfig& cfg) {
    RegimeMap map;
    map.beta2s = beta2s;
    map.alphas = alphas;
    map.cfg = cfg;
    map.cells.resize(beta2s.size() * alphas.size());

    std::atomic<size_t> next{0};
    const size_t total = map.cells.size();
    auto worker = [&]() {
        for (;;) {
            const size_t k = next.fetch_add(1);
            if (k >= total) return;
            const size_t ia = k / beta2s.size();
            const size_t ib = k % beta2s.size();
            RegimeCell cell;
            cell.beta2 = beta2s[ib];
            cell.alpha = alphas[ia];
            Params p = base;
            p.beta2 = cell.beta2;
            p.alpha = cell.alpha;
            // deterministic initial-condition policy: perturbed E* when it is
            // stable (settles fast), fixed fallback otherwise (avoids the
            // slow delayed-escape funnel around an unstable E*)
            State s0{0.4, 0.1, 0.12};
            for (const auto& e : equilibria(p)) {
                if (e.kind != EquilibriumKind::Coexistent) continue;
                bool stable = true;
                for (const auto& ev : e.eigenvalues)
                    if (ev.real() >= 0.0) stable = false;
                if (stable)
                    s0 = {e.s.x * 1.02 + 1e-3, e.s.y * 1.02 + 1e-3,
                          e.s.z * 1.02 + 1e-3};
                break;
            }
            Trajectory tr = simulate(p, s0, cfg.t_end, cfg.integ);
            if (tr.failed) {
                cell.ok = false;
                cell.error = tr.failure;
            }
            if (!tr.t.empty()) {
                cell.label = classify(tr, cfg.thresholds, &p);
                if (cell.label.kind == PatternKind::MMO ||
                    cell.label.kind == PatternKind::Bursting) {
                    cell.label.sao_location_hint =
                        sao_locator(tr, fold_parametrization(p), cfg.thresholds);
                }
            }
            map.cells[k] = std::move(cell);
        }
    };
    int n_threads = cfg.n_threads > 0
                        ? cfg.n_threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return map;
}

}  // namespace triscale
