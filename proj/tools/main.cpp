// Command-line front end: simulation, manifold geometry, continuation and
// pattern classification with CSV/JSON/SVG artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "triscale/classify.hpp"
#include "triscale/continuation.hpp"
#include "triscale/fastsub.hpp"
#include "triscale/integrate.hpp"
#include "triscale/io.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"
#include "triscale/params.hpp"
#include "triscale/reduced.hpp"
#include "triscale/rootfind.hpp"

namespace fs = std::filesystem;
using namespace triscale;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ParamCli {
    std::string preset;
    std::string file;
    std::map<std::string, double> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset, "built-in preset name (paper)");
        cmd->add_option("--params", file, "key=value config file");
        for (const char* key : {"alpha", "beta1", "beta2", "delta1", "delta2", "delta3",
                                "gamma1", "gamma2", "epsilon", "delta"}) {
            cmd->add_option_function<double>(
                std::string("--") + key,
                [this, key](double v) { overrides[key] = v; },
                std::string("model parameter ") + key);
        }
    }

    Params resolve() const {
        Params p;
        if (!file.empty()) {
            p = parse_params_file(file);
        } else if (preset == "paper" || preset.empty()) {
            const double a = overrides.count("alpha") ? overrides.at("alpha") : 0.75;
            const double b2 = overrides.count("beta2") ? overrides.at("beta2") : 0.01;
            p = Params::preset_paper(a, b2);
        } else {
            throw CLI::ValidationError("--preset", "unknown preset '" + preset + "'");
        }
        Params tmp = p;
        for (const auto& [k, v] : overrides) {
            double* slot = param_slot(tmp, k);
            if (slot) *slot = v;
        }
        return tmp;
    }
};

struct OutputCli {
    std::string dir = ".";
    std::vector<std::string> formats = {"csv", "json", "svg"};
    unsigned seed = 0;

    void attach(CLI::App* cmd) {
        const char* env = std::getenv("TRISCALE_OUT");
        if (env) dir = env;
        cmd->add_option("--out", dir, "output directory");
        cmd->add_option("--formats", formats, "artifact formats (csv json svg)")
            ->delimiter(',');
        cmd->add_option("--seed", seed, "seed recorded in artifacts");
    }
    bool want(const std::string& f) const {
        return std::find(formats.begin(), formats.end(), f) != formats.end();
    }
    std::string path(const std::string& name) const {
        fs::create_directories(dir);
        return (fs::path(dir) / name).string();
    }
};

void print_warnings(const std::vector<Warning>& ws) {
    for (const auto& w : ws)
        std::cerr << "warning (" << w.code << "): " << w.message << "\n";
}

Frame parse_frame(const std::string& s) {
    if (s == "fast") return Frame::Fast;
    if (s == "slow") return Frame::Slow;
    return Frame::Intermediate;
}

// exact coexistence equilibrium, for continuation seeding
std::optional<State> coexistent_state(const Params& p) {
    for (const auto& e : equilibria(p))
        if (e.kind == EquilibriumKind::Coexistent) return e.s;
    return std::nullopt;
}

State default_start(const Params& p) {
    // near a stable E* the perturbed equilibrium settles immediately; from an
    // unstable one the fixed fallback avoids the slow delayed-escape funnel
    for (const auto& e : equilibria(p)) {
        if (e.kind != EquilibriumKind::Coexistent) continue;
        bool stable = true;
        for (const auto& ev : e.eigenvalues)
            if (ev.real() >= 0.0) stable = false;
        if (stable)
            return {e.s.x * 1.02 + 1e-3, e.s.y * 1.02 + 1e-3, e.s.z * 1.02 + 1e-3};
        break;
    }
    return {0.4, 0.1, 0.12};
}

int run_selftest();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-timescale food-web model toolkit"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* c_sim = app.add_subcommand("simulate", "integrate the model and export the trajectory");
    ParamCli sim_params;
    OutputCli sim_out;
    sim_params.attach(c_sim);
    sim_out.attach(c_sim);
    double sim_tend = 1000.0, sim_rtol = 1e-9, sim_atol = 1e-11;
    std::string sim_frame = "intermediate", sim_scheme = "auto";
    std::vector<double> sim_x0;
    c_sim->add_option("--t-end", sim_tend, "integration time (frame units)");
    c_sim->add_option("--frame", sim_frame, "fast | intermediate | slow");
    c_sim->add_option("--rtol", sim_rtol);
    c_sim->add_option("--atol", sim_atol);
    c_sim->add_option("--scheme", sim_scheme, "auto | explicit | implicit");
    c_sim->add_option("--x0", sim_x0, "initial state x y z")->expected(3);

    // ---- equilibria ----
    auto* c_eq = app.add_subcommand("equilibria", "locate and classify equilibria");
    ParamCli eq_params;
    OutputCli eq_out;
    eq_params.attach(c_eq);
    eq_out.attach(c_eq);

    // ---- fold-classify ----
    auto* c_fold = app.add_subcommand("fold-classify", "classify the fold curve shape");
    ParamCli fold_params;
    OutputCli fold_out;
    fold_params.attach(c_fold);
    fold_out.attach(c_fold);

    // ---- manifold-export ----
    auto* c_mani = app.add_subcommand("manifold-export",
                                      "sample the critical/superslow manifolds");
    ParamCli mani_params;
    OutputCli mani_out;
    mani_params.attach(c_mani);
    mani_out.attach(c_mani);

    // ---- foldsing ----
    auto* c_fsing = app.add_subcommand("foldsing", "folded singularities table");
    ParamCli fsing_params;
    OutputCli fsing_out;
    bool fsing_json = false;
    fsing_params.attach(c_fsing);
    fsing_out.attach(c_fsing);
    c_fsing->add_flag("--json", fsing_json, "print JSON instead of a table");

    // ---- fastbif ----
    auto* c_fast = app.add_subcommand("fastbif", "planar fast-subsystem bifurcations");
    ParamCli fast_params;
    OutputCli fast_out;
    bool fast_two_par = false, fast_no_snp = false;
    double fast_zlo = 1e-3, fast_zhi = 0.6;
    fast_params.attach(c_fast);
    fast_out.attach(c_fast);
    c_fast->add_flag("--two-par", fast_two_par, "two-parameter (z, beta2) diagram");
    c_fast->add_flag("--no-snp", fast_no_snp, "skip saddle-node-of-cycles tracing");
    c_fast->add_option("--z-lo", fast_zlo);
    c_fast->add_option("--z-hi", fast_zhi);

    // ---- continue ----
    auto* c_cont = app.add_subcommand("continue", "continuation of equilibria or cycles");
    ParamCli cont_params;
    OutputCli cont_out;
    std::string cont_vary = "beta2";
    double cont_from = 0.001, cont_to = 0.1;
    bool cont_periodic = false;
    double cont_settle = 400.0;
    int cont_segments = 8;
    cont_params.attach(c_cont);
    cont_out.attach(c_cont);
    c_cont->add_option("--vary", cont_vary, "parameter name");
    c_cont->add_option("--from", cont_from);
    c_cont->add_option("--to", cont_to);
    c_cont->add_flag("--periodic", cont_periodic, "continue a periodic orbit");
    c_cont->add_option("--settle", cont_settle, "settling time for cycle seeding");
    c_cont->add_option("--segments", cont_segments, "multiple-shooting segments");

    // ---- hopf2par ----
    auto* c_h2 = app.add_subcommand("hopf2par", "two-parameter Hopf curve (beta2, alpha)");
    ParamCli h2_params;
    OutputCli h2_out;
    double h2_b2lo = 1e-4, h2_b2hi = 0.12, h2_alo = 0.05, h2_ahi = 1.0;
    h2_params.attach(c_h2);
    h2_out.attach(c_h2);
    c_h2->add_option("--beta2-lo", h2_b2lo);
    c_h2->add_option("--beta2-hi", h2_b2hi);
    c_h2->add_option("--alpha-lo", h2_alo);
    c_h2->add_option("--alpha-hi", h2_ahi);

    // ---- classify ----
    auto* c_cls = app.add_subcommand("classify", "simulate and label the attractor");
    ParamCli cls_params;
    OutputCli cls_out;
    double cls_tend = 1500.0;
    cls_params.attach(c_cls);
    cls_out.attach(c_cls);
    c_cls->add_option("--t-end", cls_tend);

    // ---- regime-map ----
    auto* c_map = app.add_subcommand("regime-map", "pattern labels over a (beta2, alpha) grid");
    ParamCli map_params;
    OutputCli map_out;
    std::vector<double> map_b2 = {0.004, 0.05, 8}, map_al = {0.3, 0.9, 4};
    double map_tend = 1200.0;
    int map_threads = 0;
    map_params.attach(c_map);
    map_out.attach(c_map);
    c_map->add_option("--beta2-grid", map_b2, "lo hi n")->expected(3);
    c_map->add_option("--alpha-grid", map_al, "lo hi n")->expected(3);
    c_map->add_option("--t-end", map_tend);
    c_map->add_option("--threads", map_threads);

    // ---- nondim ----
    auto* c_nd = app.add_subcommand("nondim", "nondimensionalize a dimensional config");
    OutputCli nd_out;
    std::string nd_input;
    nd_out.attach(c_nd);
    c_nd->add_option("--input", nd_input, "dimensional key=value file")->required();

    // ---- selftest ----
    app.add_subcommand("selftest", "fast acceptance subset and property checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed()) {
            const Params p = sim_params.resolve();
            print_warnings(p.validate());
            IntegratorConfig cfg;
            cfg.rtol = sim_rtol;
            cfg.atol = sim_atol;
            cfg.frame = parse_frame(sim_frame);
            cfg.scheme = sim_scheme == "explicit" ? Scheme::Explicit
                       : sim_scheme == "implicit" ? Scheme::Implicit
                                                  : Scheme::Auto;
            const State s0 = sim_x0.size() == 3 ? State{sim_x0[0], sim_x0[1], sim_x0[2]}
                                                : default_start(p);
            Trajectory tr = simulate(p, s0, sim_tend, cfg);
            if (sim_out.want("csv"))
                write_trajectory_csv(sim_out.path("trajectory.csv"), tr, p, sim_out.seed);
            if (sim_out.want("json"))
                write_events_json(sim_out.path("events.json"), tr, p, sim_out.seed);
            if (sim_out.want("svg"))
                write_trajectory_svg(sim_out.path("trajectory.svg"), tr, "x(t)");
            std::cout << "simulate: " << tr.t.size() << " nodes, " << tr.events.size()
                      << " events" << (tr.failed ? " [FAILED: " + tr.failure + "]" : "")
                      << "\n";
            return tr.failed ? kExitNumerical : kExitOk;
        }

        if (c_eq->parsed()) {
            const Params p = eq_params.resolve();
            print_warnings(p.validate());
            auto eqs = equilibria(p);
            nlohmann::json j;
            j["version"] = kVersion;
            auto& arr = j["equilibria"] = nlohmann::json::array();
            for (const auto& e : eqs) {
                std::cout << to_string(e.kind) << ": (" << fmt_double(e.s.x) << ", "
                          << fmt_double(e.s.y) << ", " << fmt_double(e.s.z) << ")"
                          << " residual=" << fmt_double(e.residual) << "\n";
                arr.push_back({{"kind", to_string(e.kind)},
                               {"x", e.s.x},
                               {"y", e.s.y},
                               {"z", e.s.z},
                               {"eig", {{e.eigenvalues[0].real(), e.eigenvalues[0].imag()},
                                        {e.eigenvalues[1].real(), e.eigenvalues[1].imag()},
                                        {e.eigenvalues[2].real(), e.eigenvalues[2].imag()}}},
                               {"residual", e.residual}});
            }
            if (eq_out.want("json")) {
                std::ofstream f(eq_out.path("equilibria.json"));
                f << j.dump(2) << "\n";
            }
            std::cout << "equilibria: " << eqs.size() << " found\n";
            return kExitOk;
        }

        if (c_fold->parsed()) {
            const Params p = fold_params.resolve();
            print_warnings(p.validate());
            const FoldCurve fc = fold_parametrization(p);
            if (fold_out.want("csv")) {
                std::ofstream f(fold_out.path("fold_branches.csv"));
                f << csv_metadata(p, fold_out.seed);
                f << "x,y,z,label\n";
                for (const auto& arc : fc.branches)
                    for (const auto& q : arc.pts)
                        f << fmt_double(q[0]) << ',' << fmt_double(q[1]) << ','
                          << fmt_double(q[2]) << ',' << to_string(arc.label) << '\n';
            }
            if (fold_out.want("svg")) {
                SvgPlot plot;
                const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
                for (const auto& arc : fc.branches) {
                    std::vector<double> xs, zs;
                    for (const auto& q : arc.pts) {
                        xs.push_back(q[0]);
                        zs.push_back(q[2]);
                    }
                    plot.line_series(xs, zs, colors[static_cast<int>(arc.label)], 1.5);
                    plot.legend_entry(colors[static_cast<int>(arc.label)],
                                      to_string(arc.label));
                }
                plot.labels("fold curve", "x", "z");
                plot.write(fold_out.path("fold_curve.svg"));
            }
            std::cout << to_string(fc.case_label) << (fc.degenerate ? " (degenerate)" : "")
                      << "\n";
            return kExitOk;
        }

        if (c_mani->parsed()) {
            const Params p = mani_params.resolve();
            print_warnings(p.validate());
            const FoldCurve fc = fold_parametrization(p);
            const SuperslowCurves sc = superslow_curves(p);
            if (mani_out.want("csv"))
                write_manifold_csv(mani_out.path("manifold.csv"), p, fc, sc,
                                   mani_out.seed);
            if (mani_out.want("svg")) {
                for (const bool swap : {false, true}) {
                    SvgPlot plot;
                    auto series = [&](const std::vector<std::array<double, 3>>& pts,
                                      const char* color) {
                        std::vector<double> a, b;
                        for (const auto& q : pts) {
                            a.push_back(swap ? q[2] : q[0]);
                            b.push_back(swap ? q[0] : q[2]);
                        }
                        plot.line_series(a, b, color, 1.2);
                    };
                    for (const auto& arc : fc.branches) series(arc.pts, "#d62728");
                    series(sc.Z.pts, "#1f77b4");
                    series(sc.L.pts, "#2ca02c");
                    plot.legend_entry("#d62728", "fold");
                    plot.legend_entry("#1f77b4", "Z");
                    plot.legend_entry("#2ca02c", "L");
                    plot.labels("manifolds", swap ? "z" : "x", swap ? "x" : "z");
                    plot.write(mani_out.path(swap ? "manifold_zx.svg" : "manifold_xz.svg"));
                }
            }
            std::cout << "manifold-export: fold " << to_string(fc.case_label) << ", Z "
                      << (sc.Z.cubic ? "cubic" : "non-cubic") << ", "
                      << sc.hopf.size() << " layer Hopf points\n";
            return kExitOk;
        }

        if (c_fsing->parsed()) {
            const Params p = fsing_params.resolve();
            print_warnings(p.validate());
            auto fsv = folded_singularities(p);
            if (fsing_json) {
                nlohmann::json j;
                for (const auto& q : fsv)
                    j.push_back({{"x", q.s.x},
                                 {"y", q.s.y},
                                 {"z", q.s.z},
                                 {"kind", to_string(q.kind)},
                                 {"branch", to_string(q.branch)},
                                 {"mu_ratio", q.mu_ratio}});
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << folded_singularities_table(fsv);
            }
            if (fsing_out.want("json"))
                write_folded_singularities_json(fsing_out.path("foldsing.json"), fsv, p);
            std::cout << "foldsing: " << fsv.size() << " found\n";
            return kExitOk;
        }

        if (c_fast->parsed()) {
            const Params p = fast_params.resolve();
            print_warnings(p.validate());
            if (fast_two_par) {
                TwoParConfig cfg;
                cfg.trace_snp = !fast_no_snp;
                auto d = fast_subsystem_2par(p, cfg);
                if (fast_out.want("csv")) {
                    std::ofstream f(fast_out.path("fastbif_2par.csv"));
                    f << csv_metadata(p, fast_out.seed);
                    f << "curve,z,beta2,x\n";
                    for (const auto& q : d.snf)
                        f << "SNf," << fmt_double(q.z) << ',' << fmt_double(q.beta2)
                          << ',' << fmt_double(q.x) << '\n';
                    for (const auto& q : d.hopf)
                        f << "H," << fmt_double(q.z) << ',' << fmt_double(q.beta2) << ','
                          << fmt_double(q.x) << '\n';
                    for (const auto& q : d.snp)
                        f << "SNp," << fmt_double(q.z) << ',' << fmt_double(q.beta2)
                          << ',' << fmt_double(q.x) << '\n';
                }
                std::vector<BifPoint> pts = d.bt;
                pts.insert(pts.end(), d.cusp.begin(), d.cusp.end());
                pts.insert(pts.end(), d.gh.begin(), d.gh.end());
                if (fast_out.want("json"))
                    write_bifpoints_json(fast_out.path("fastbif_2par.json"), pts, p,
                                         fast_out.seed);
                std::cout << "fastbif 2par: " << d.bt.size() << " BT, " << d.gh.size()
                          << " GH, " << d.cusp.size() << " cusp, self-intersection="
                          << (d.hopf_self_intersects ? "yes" : "no") << "\n";
                for (const auto& b : d.bt)
                    std::cout << "  BT at (z, beta2) = (" << fmt_double(b.par1) << ", "
                              << fmt_double(b.par2) << ")\n";
            } else {
                auto d = fast_subsystem_diagram(p, fast_zlo, fast_zhi);
                if (fast_out.want("csv")) {
                    std::ofstream f(fast_out.path("fastbif.csv"));
                    f << csv_metadata(p, fast_out.seed);
                    f << "type,z,x,x_min,x_max,period,stable,curve\n";
                    for (const auto& e : d.equilibria)
                        f << "eq," << fmt_double(e.z) << ',' << fmt_double(e.x) << ",,,,"
                          << (e.stable ? 1 : 0) << ','
                          << (e.curve == SuperslowWhich::Z ? "Z" : "L") << '\n';
                    for (const auto& cb : d.cycles)
                        for (const auto& q : cb.points)
                            f << "cycle," << fmt_double(q.z) << ",,"
                              << fmt_double(q.x_min) << ',' << fmt_double(q.x_max) << ','
                              << fmt_double(q.period) << ',' << (q.stable ? 1 : 0)
                              << ",\n";
                }
                std::cout << "fastbif: " << d.hopf.size() << " layer Hopf, "
                          << d.cycles.size() << " cycle branches";
                for (const auto& cb : d.cycles) {
                    std::cout << " [z_H=" << fmt_double(cb.z_hopf) << " SNp:";
                    for (double z : cb.snp_z) std::cout << ' ' << fmt_double(z);
                    std::cout << (cb.homoclinic_end ? " ->HC" : "") << "]";
                }
                std::cout << "\n";
            }
            return kExitOk;
        }

        if (c_cont->parsed()) {
            const Params p = cont_params.resolve();
            print_warnings(p.validate());
            Branch br;
            if (cont_periodic) {
                Params ps = p;
                double* slot = param_slot(ps, cont_vary);
                if (!slot) throw CLI::ValidationError("--vary", "unknown parameter");
                *slot = cont_from;
                State anchor;
                double period;
                ShootingConfig scfg;
                scfg.segments = cont_segments;
                if (!find_periodic_orbit(ps, cont_settle, default_start(ps), scfg,
                                         anchor, period)) {
                    std::cout << "continue: no periodic orbit found at start\n";
                    return kExitNumerical;
                }
                br = continue_periodic(p, cont_vary, cont_from, cont_to, anchor, period,
                                       scfg);
            } else {
                Params ps = p;
                double* slot = param_slot(ps, cont_vary);
                if (!slot) throw CLI::ValidationError("--vary", "unknown parameter");
                *slot = cont_from;
                auto seed = coexistent_state(ps);
                if (!seed) {
                    std::cout << "continue: no coexistence equilibrium at the start\n";
                    return kExitNumerical;
                }
                br = continue_equilibrium(p, cont_vary, cont_from, cont_to, *seed);
            }
            if (cont_out.want("csv"))
                write_branch_csv(cont_out.path("branch.csv"), br, p, cont_out.seed);
            if (cont_out.want("json"))
                write_bifpoints_json(cont_out.path("bifurcations.json"), br.detected, p,
                                     cont_out.seed);
            std::cout << "continue: " << br.points.size() << " points, "
                      << br.detected.size() << " bifurcations"
                      << (br.truncated ? " [truncated: " + br.note + "]" : "") << "\n";
            for (const auto& b : br.detected)
                std::cout << "  " << to_string(b.kind) << " at " << br.parameter << " = "
                          << fmt_double(b.par1) << "\n";
            return br.truncated && br.points.size() < 3 ? kExitNumerical : kExitOk;
        }

        if (c_h2->parsed()) {
            const Params p = h2_params.resolve();
            print_warnings(p.validate());
            // seed: first Hopf point of the equilibrium branch in beta2
            Params ps = p;
            ps.beta2 = std::max(1e-4, h2_b2lo);
            auto seed0 = coexistent_state(ps);
            if (!seed0) {
                std::cout << "hopf2par: no coexistence equilibrium at beta2-lo\n";
                return kExitNumerical;
            }
            Branch eq = continue_equilibrium(p, "beta2", std::max(1e-4, h2_b2lo),
                                             h2_b2hi, *seed0);
            const BifPoint* hopf = nullptr;
            for (const auto& b : eq.detected)
                if (b.kind == BifKind::Hopf) {
                    hopf = &b;
                    break;
                }
            if (!hopf) {
                std::cout << "hopf2par: no Hopf seed found on the equilibrium branch\n";
                return kExitNumerical;
            }
            HopfCurve hc = continue_hopf_2par(p, hopf->par1, hopf->s, h2_b2lo, h2_b2hi,
                                              h2_alo, h2_ahi);
            if (h2_out.want("csv")) {
                std::ofstream f(h2_out.path("hopf_curve.csv"));
                f << csv_metadata(p, h2_out.seed);
                f << "beta2,alpha,x,y,z,omega2\n";
                for (const auto& q : hc.points)
                    f << fmt_double(q.beta2) << ',' << fmt_double(q.alpha) << ','
                      << fmt_double(q.s.x) << ',' << fmt_double(q.s.y) << ','
                      << fmt_double(q.s.z) << ',' << fmt_double(q.omega2) << '\n';
            }
            std::cout << "hopf2par: " << hc.points.size() << " points"
                      << (hc.closed ? " (closed curve)" : "") << ", "
                      << hc.degeneracies.size() << " degeneracies\n";
            return kExitOk;
        }

        if (c_cls->parsed()) {
            const Params p = cls_params.resolve();
            print_warnings(p.validate());
            IntegratorConfig cfg;
            Trajectory tr = simulate(p, default_start(p), cls_tend, cfg);
            if (tr.failed) {
                std::cout << "classify: integration failed: " << tr.failure << "\n";
                return kExitNumerical;
            }
            PatternLabel lb = classify(tr, {}, &p);
            if (lb.kind == PatternKind::MMO || lb.kind == PatternKind::Bursting)
                lb.sao_location_hint = sao_locator(tr, fold_parametrization(p));
            std::cout << "classify: " << to_string(lb.kind);
            if (lb.kind == PatternKind::Bursting)
                std::cout << " spikes_per_burst=" << lb.spikes_per_burst;
            if (lb.kind == PatternKind::MMO) {
                std::cout << " signature=";
                for (const auto& s : lb.mmo_signature)
                    std::cout << s[0] << "^" << s[1] << " ";
            }
            std::cout << " sao_hint=" << to_string(lb.sao_location_hint)
                      << " period=" << fmt_double(lb.period)
                      << " quiescent=" << fmt_double(lb.quiescent_fraction) << "\n";
            if (cls_out.want("json")) {
                nlohmann::json j;
                j["version"] = kVersion;
                j["kind"] = to_string(lb.kind);
                j["spikes_per_burst"] = lb.spikes_per_burst;
                j["sao_hint"] = to_string(lb.sao_location_hint);
                j["period"] = lb.period;
                j["quiescent_fraction"] = lb.quiescent_fraction;
                auto& sig = j["mmo_signature"] = nlohmann::json::array();
                for (const auto& s : lb.mmo_signature) sig.push_back({s[0], s[1]});
                std::ofstream f(cls_out.path("label.json"));
                f << j.dump(2) << "\n";
            }
            return kExitOk;
        }

        if (c_map->parsed()) {
            const Params p = map_params.resolve();
            print_warnings(p.validate());
            auto linspace = [](double lo, double hi, int n) {
                std::vector<double> v;
                for (int i = 0; i < n; ++i)
                    v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
                return v;
            };
            RegimeMapConfig cfg;
            cfg.t_end = map_tend;
            cfg.n_threads = map_threads;
            cfg.seed = map_out.seed;
            RegimeMap map = regime_map(p, linspace(map_b2[0], map_b2[1],
                                                   static_cast<int>(map_b2[2])),
                                       linspace(map_al[0], map_al[1],
                                                static_cast<int>(map_al[2])),
                                       cfg);
            if (map_out.want("csv"))
                write_regime_csv(map_out.path("regime.csv"), map, p);
            if (map_out.want("svg")) write_regime_svg(map_out.path("regime.svg"), map);
            int failed = 0;
            for (const auto& c : map.cells)
                if (!c.ok) ++failed;
            std::cout << "regime-map: " << map.cells.size() << " cells, " << failed
                      << " failures\n";
            return kExitOk;
        }

        if (c_nd->parsed()) {
            std::ifstream in(nd_input);
            if (!in) throw CLI::ValidationError("--input", "cannot open " + nd_input);
            std::map<std::string, double> kv;
            std::string line;
            while (std::getline(in, line)) {
                auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                std::string key = line.substr(0, eq);
                key.erase(remove_if(key.begin(), key.end(), ::isspace), key.end());
                kv[key] = std::stod(line.substr(eq + 1));
            }
            auto need = [&](const char* k) {
                auto it = kv.find(k);
                if (it == kv.end())
                    throw CLI::ValidationError("--input", std::string("missing key ") + k);
                return it->second;
            };
            DimensionalParams dp;
            dp.r = need("r");
            dp.K = need("K");
            dp.p1 = need("p1");
            dp.H1 = need("H1");
            dp.b1 = need("b1");
            dp.d1 = need("d1");
            dp.m1 = need("m1");
            dp.p2 = need("p2");
            dp.H2 = need("H2");
            dp.b2 = need("b2");
            dp.d2 = need("d2");
            dp.q = need("q");
            dp.d3 = need("d3");
            dp.m2 = need("m2");
            dp.alpha = need("alpha");
            NondimResult r = nondimensionalize(dp);
            print_warnings(r.warnings);
            std::cout << serialize_params(r.params);
            std::cout << "# scales: epsilon1=" << fmt_double(r.scales.epsilon1)
                      << " epsilon2=" << fmt_double(r.scales.epsilon2)
                      << " epsilon3=" << fmt_double(r.scales.epsilon3)
                      << " Y0=" << fmt_double(r.scales.Y0)
                      << " Z0=" << fmt_double(r.scales.Z0) << "\n";
            std::ofstream f(nd_out.path("nondim_params.cfg"));
            f << serialize_params(r.params);
            return kExitOk;
        }

        if (app.get_subcommand("selftest")->parsed()) return run_selftest();
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

namespace {

int run_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        std::cout << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    // degenerate nodes and layer Hopf interleaving
    {
        const Params p = Params::preset_paper(0.6, 0.005);
        auto dn = degenerate_nodes(p);
        std::vector<double> hx;
        for (const auto& h : hopf_points_fast(p))
            if (h.curve == SuperslowWhich::Z) hx.push_back(h.x);
        bool ok = dn.size() == 4 && hx.size() == 2;
        if (ok)
            ok = dn[0] < hx[0] && hx[0] < dn[1] && dn[2] < hx[1] && hx[1] < dn[3];
        std::ostringstream d;
        d << dn.size() << " nodes, " << hx.size() << " Hopf";
        check("degenerate-node structure (beta2=0.005, alpha=0.6)", ok, d.str());
    }

    // fold-curve case labels
    {
        struct Case {
            double b2, a;
            FoldCase want;
        } cases[] = {{0.048, 0.6, FoldCase::Case2i},
                     {0.025, 0.6, FoldCase::Case2ii},
                     {0.005, 0.6, FoldCase::Case3},
                     {0.0245, 0.8, FoldCase::Case2ii}};
        for (const auto& c : cases) {
            const FoldCurve fc = fold_parametrization(Params::preset_paper(c.a, c.b2));
            std::ostringstream name;
            name << "fold case (beta2=" << c.b2 << ", alpha=" << c.a << ")";
            check(name.str(), fc.case_label == c.want, to_string(fc.case_label));
        }
    }

    // property spot checks
    {
        const Params p = Params::preset_paper(0.75, 0.01);
        const State s{0.3, 0.12, 0.2};
        Eigen::Matrix3d J = jacobian(s, p, Frame::Fast);
        double worst = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6;
            State sp = s, sm = s;
            double* fp = j == 0 ? &sp.x : j == 1 ? &sp.y : &sp.z;
            double* fm = j == 0 ? &sm.x : j == 1 ? &sm.y : &sm.z;
            *fp += h;
            *fm -= h;
            auto vp = vector_field(sp, p, Frame::Fast);
            auto vm = vector_field(sm, p, Frame::Fast);
            for (int i = 0; i < 3; ++i) {
                const double fd = (vp[i] - vm[i]) / (2 * h);
                worst = std::max(worst, std::abs(fd - J(i, j)) /
                                            std::max(1.0, std::abs(fd)));
            }
        }
        check("jacobian vs finite differences", worst < 1e-6);

        const FoldCurve fc = fold_parametrization(p);
        check("fold parametrization residuals", fc.max_residual < 1e-10,
              fmt_double(fc.max_residual));
        const double root = fold_nu(0.5 * (1.0 - p.beta1), p);
        check("nu root at (1-beta1)/2", std::abs(root) < 1e-12);
    }

    // pattern screening at reduced horizon
    {
        struct Pt {
            double b2, a;
            PatternKind want;
        } pts[] = {{0.01, 0.75, PatternKind::MMO},
                   {0.0245, 0.8, PatternKind::Bursting}};
        for (const auto& c : pts) {
            const Params p = Params::preset_paper(c.a, c.b2);
            Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 800.0, {});
            const PatternLabel lb = classify(tr, {}, &p);
            std::ostringstream name;
            name << "pattern screen (beta2=" << c.b2 << ", alpha=" << c.a << ")";
            check(name.str(), lb.kind == c.want, to_string(lb.kind));
        }
    }

    std::cout << (failures == 0 ? "selftest: all passed\n"
                                : "selftest: " + std::to_string(failures) + " failed\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace
