#include "triscale/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace triscale {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_metadata(const Params& p, unsigned seed) {
    std::ostringstream out;
    out << "# version=" << kVersion << "\n";
    out << "# seed=" << seed << "\n";
    std::istringstream kv(serialize_params(p));
    std::string line;
    while (std::getline(kv, line)) out << "# " << line << "\n";
    return out.str();
}

namespace {

std::ofstream open_or_throw(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}

nlohmann::json params_json(const Params& p) {
    return {{"alpha", p.alpha},   {"beta1", p.beta1},   {"beta2", p.beta2},
            {"delta1", p.delta1}, {"delta2", p.delta2}, {"delta3", p.delta3},
            {"gamma1", p.gamma1}, {"gamma2", p.gamma2}, {"epsilon", p.epsilon},
            {"delta", p.delta}};
}

const char* event_name(EventKind k) {
    switch (k) {
        case EventKind::XMax: return "x-max";
        case EventKind::XMin: return "x-min";
        case EventKind::SectionCross: return "section-cross";
        case EventKind::Custom: return "custom";
    }
    return "?";
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& tr,
                          const Params& p, unsigned seed) {
    auto f = open_or_throw(path);
    f << csv_metadata(p, seed);
    f << "t,x,y,z\n";
    for (size_t i = 0; i < tr.t.size(); ++i) {
        f << fmt_double(tr.t[i]) << ',' << fmt_double(tr.u[i].x) << ','
          << fmt_double(tr.u[i].y) << ',' << fmt_double(tr.u[i].z) << '\n';
    }
}

void write_events_json(const std::string& path, const Trajectory& tr,
                       const Params& p, unsigned seed) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["params"] = params_json(p);
    j["failed"] = tr.failed;
    if (tr.failed) j["failure"] = tr.failure;
    auto& evs = j["events"] = nlohmann::json::array();
    for (const auto& e : tr.events) {
        evs.push_back({{"t", e.t},
                       {"kind", event_name(e.kind)},
                       {"x", e.s.x},
                       {"y", e.s.y},
                       {"z", e.s.z}});
    }
    auto f = open_or_throw(path);
    f << j.dump(2) << '\n';
}

void write_branch_csv(const std::string& path, const Branch& br, const Params& p,
                      unsigned seed) {
    auto f = open_or_throw(path);
    f << csv_metadata(p, seed);
    f << "# parameter=" << br.parameter << "\n";
    f << "# kind=" << (br.kind == BranchKind::Equilibrium ? "equilibrium" : "cycle")
      << "\n";
    if (br.truncated) f << "# truncated=" << br.note << "\n";
    f << "par,period,x,y,z,x_min,x_max,stable,re1,im1,re2,im2,re3,im3\n";
    for (const auto& q : br.points) {
        f << fmt_double(q.par1) << ',' << fmt_double(q.period) << ','
          << fmt_double(q.s.x) << ',' << fmt_double(q.s.y) << ',' << fmt_double(q.s.z)
          << ',' << fmt_double(q.x_min) << ',' << fmt_double(q.x_max) << ','
          << (q.stable ? 1 : 0);
        for (const auto& e : q.eig)
            f << ',' << fmt_double(e.real()) << ',' << fmt_double(e.imag());
        f << '\n';
    }
    if (!br.detected.empty()) {
        f << "# detected bifurcations: kind,par,period,x,y,z\n";
        for (const auto& b : br.detected) {
            f << "# bif," << to_string(b.kind) << ',' << fmt_double(b.par1) << ','
              << fmt_double(b.period) << ',' << fmt_double(b.s.x) << ','
              << fmt_double(b.s.y) << ',' << fmt_double(b.s.z) << '\n';
        }
    }
}

void write_bifpoints_json(const std::string& path, const std::vector<BifPoint>& pts,
                          const Params& p, unsigned seed) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["params"] = params_json(p);
    auto& arr = j["bifurcations"] = nlohmann::json::array();
    for (const auto& b : pts) {
        arr.push_back({{"kind", to_string(b.kind)},
                       {"par1", b.par1},
                       {"par2", b.par2},
                       {"x", b.s.x},
                       {"y", b.s.y},
                       {"z", b.s.z},
                       {"period", b.period},
                       {"diagnostic", b.diagnostic}});
    }
    auto f = open_or_throw(path);
    f << j.dump(2) << '\n';
}

void write_manifold_csv(const std::string& path, const Params& p,
                        const FoldCurve& fc, const SuperslowCurves& sc,
                        unsigned seed) {
    auto f = open_or_throw(path);
    f << csv_metadata(p, seed);
    f << "# fold_case=" << to_string(fc.case_label)
      << (fc.degenerate ? " (degenerate)" : "") << "\n";
    f << "x,y,z,label\n";
    auto dump_curve = [&](const std::vector<std::array<double, 3>>& pts,
                          const std::string& label) {
        for (const auto& q : pts)
            f << fmt_double(q[0]) << ',' << fmt_double(q[1]) << ',' << fmt_double(q[2])
              << ',' << label << '\n';
    };
    for (const auto& arc : fc.branches) dump_curve(arc.pts, to_string(arc.label));
    dump_curve(sc.Z.pts, "Z");
    dump_curve(sc.L.pts, "L");
    // surface sample of S on a coarse grid
    for (int i = 1; i <= 40; ++i) {
        for (int j = 0; j <= 40; ++j) {
            const double x = i / 40.0;
            const double z = 0.5 * j / 40.0;
            const double y = F_surface(x, z, p);
            if (y >= 0.0)
                f << fmt_double(x) << ',' << fmt_double(y) << ',' << fmt_double(z)
                  << ",S\n";
        }
    }
}

void write_regime_csv(const std::string& path, const RegimeMap& map, const Params& p) {
    auto f = open_or_throw(path);
    f << csv_metadata(p, map.cfg.seed);
    f << "# t_end=" << fmt_double(map.cfg.t_end) << "\n";
    f << "beta2,alpha,label,spikes_per_burst,sao_hint,period,quiescent_fraction,ok\n";
    for (const auto& c : map.cells) {
        f << fmt_double(c.beta2) << ',' << fmt_double(c.alpha) << ','
          << to_string(c.label.kind) << ',' << c.label.spikes_per_burst << ','
          << to_string(c.label.sao_location_hint) << ',' << fmt_double(c.label.period)
          << ',' << fmt_double(c.label.quiescent_fraction) << ',' << (c.ok ? 1 : 0)
          << '\n';
    }
}

void write_folded_singularities_json(const std::string& path,
                                     const std::vector<FoldedSingularity>& fs,
                                     const Params& p) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["params"] = params_json(p);
    auto& arr = j["folded_singularities"] = nlohmann::json::array();
    for (const auto& q : fs) {
        arr.push_back({{"x", q.s.x},
                       {"y", q.s.y},
                       {"z", q.s.z},
                       {"kind", to_string(q.kind)},
                       {"branch", to_string(q.branch)},
                       {"eig1_re", q.eig1.real()},
                       {"eig1_im", q.eig1.imag()},
                       {"eig2_re", q.eig2.real()},
                       {"eig2_im", q.eig2.imag()},
                       {"mu_ratio", q.mu_ratio}});
    }
    auto f = open_or_throw(path);
    f << j.dump(2) << '\n';
}

std::string folded_singularities_table(const std::vector<FoldedSingularity>& fs) {
    std::ostringstream out;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-12s %-12s %-12s %-16s %-6s %-22s %-10s\n", "x",
                  "y", "z", "kind", "branch", "eigenvalues", "mu-ratio");
    out << buf;
    for (const auto& q : fs) {
        std::snprintf(buf, sizeof(buf),
                      "%-12.6g %-12.6g %-12.6g %-16s %-6s %.4g%+.4gi, %.4g%+.4gi %-10.4g\n",
                      q.s.x, q.s.y, q.s.z, to_string(q.kind), to_string(q.branch),
                      q.eig1.real(), q.eig1.imag(), q.eig2.real(), q.eig2.imag(),
                      q.mu_ratio);
        out << buf;
    }
    return out.str();
}

// ---------------------------------------------------------------------------

SvgPlot::SvgPlot(int width, int height) : w_(width), h_(height) {}

void SvgPlot::line_series(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& color, double width) {
    series_.push_back({xs, ys, color, width, false});
}

void SvgPlot::point_series(const std::vector<double>& xs, const std::vector<double>& ys,
                           const std::string& color, double radius) {
    series_.push_back({xs, ys, color, radius, true});
}

void SvgPlot::labels(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) {
    title_ = title;
    xlabel_ = xlabel;
    ylabel_ = ylabel;
}

void SvgPlot::legend_entry(const std::string& color, const std::string& text) {
    legend_.push_back({color, text});
}

void SvgPlot::write(const std::string& path) const {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& s : series_) {
        for (double v : s.xs) {
            if (std::isfinite(v)) {
                xlo = std::min(xlo, v);
                xhi = std::max(xhi, v);
            }
        }
        for (double v : s.ys) {
            if (std::isfinite(v)) {
                ylo = std::min(ylo, v);
                yhi = std::max(yhi, v);
            }
        }
    }
    if (!(xhi > xlo)) {
        xlo = 0;
        xhi = 1;
    }
    if (!(yhi > ylo)) {
        ylo = 0;
        yhi = 1;
    }
    const double mx = 60, my = 40;
    auto X = [&](double v) { return mx + (v - xlo) / (xhi - xlo) * (w_ - 1.5 * mx); };
    auto Y = [&](double v) {
        return h_ - my - (v - ylo) / (yhi - ylo) * (h_ - 2.0 * my);
    };

    auto f = open_or_throw(path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w_ << "' height='" << h_
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    // axes
    f << "<line x1='" << X(xlo) << "' y1='" << Y(ylo) << "' x2='" << X(xhi) << "' y2='"
      << Y(ylo) << "' stroke='black'/>\n";
    f << "<line x1='" << X(xlo) << "' y1='" << Y(ylo) << "' x2='" << X(xlo) << "' y2='"
      << Y(yhi) << "' stroke='black'/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xlo + (xhi - xlo) * k / 4;
        const double yv = ylo + (yhi - ylo) * k / 4;
        f << "<text x='" << X(xv) << "' y='" << h_ - my + 16
          << "' font-size='10' text-anchor='middle'>" << fmt_double(xv).substr(0, 8)
          << "</text>\n";
        f << "<text x='" << mx - 6 << "' y='" << Y(yv) + 3
          << "' font-size='10' text-anchor='end'>" << fmt_double(yv).substr(0, 8)
          << "</text>\n";
    }
    for (const auto& s : series_) {
        if (s.points) {
            for (size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                f << "<circle cx='" << X(s.xs[i]) << "' cy='" << Y(s.ys[i]) << "' r='"
                  << s.w << "' fill='" << s.color << "'/>\n";
            }
        } else {
            f << "<polyline fill='none' stroke='" << s.color << "' stroke-width='"
              << s.w << "' points='";
            for (size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                f << X(s.xs[i]) << ',' << Y(s.ys[i]) << ' ';
            }
            f << "'/>\n";
        }
    }
    f << "<text x='" << w_ / 2 << "' y='20' font-size='13' text-anchor='middle'>"
      << title_ << "</text>\n";
    f << "<text x='" << w_ / 2 << "' y='" << h_ - 6
      << "' font-size='11' text-anchor='middle'>" << xlabel_ << "</text>\n";
    f << "<text x='14' y='" << h_ / 2 << "' font-size='11' text-anchor='middle' "
      << "transform='rotate(-90 14 " << h_ / 2 << ")'>" << ylabel_ << "</text>\n";
    double ly = 30;
    for (const auto& [color, text] : legend_) {
        f << "<rect x='" << w_ - 150 << "' y='" << ly - 9
          << "' width='12' height='12' fill='" << color << "'/>\n";
        f << "<text x='" << w_ - 132 << "' y='" << ly + 1 << "' font-size='11'>" << text
          << "</text>\n";
        ly += 16;
    }
    f << "</svg>\n";
}

void write_trajectory_svg(const std::string& path, const Trajectory& tr,
                          const std::string& title) {
    SvgPlot plot;
    std::vector<double> ts, xs;
    ts.reserve(tr.t.size());
    xs.reserve(tr.t.size());
    for (size_t i = 0; i < tr.t.size(); ++i) {
        ts.push_back(tr.t[i]);
        xs.push_back(tr.u[i].x);
    }
    plot.line_series(ts, xs, "#1f77b4", 1.0);
    plot.labels(title, "t", "x");
    plot.write(path);
}

void write_regime_svg(const std::string& path, const RegimeMap& map) {
    static const std::array<std::pair<PatternKind, const char*>, 7> kColors = {{
        {PatternKind::SteadyState, "#bbbbbb"},
        {PatternKind::HopfCycle, "#8dd3c7"},
        {PatternKind::RelaxationOscillation, "#80b1d3"},
        {PatternKind::MMO, "#fb8072"},
        {PatternKind::Bursting, "#fdb462"},
        {PatternKind::Spiking, "#b3de69"},
        {PatternKind::AmplitudeModulated, "#bc80bd"},
    }};
    SvgPlot plot;
    for (const auto& [kind, color] : kColors) {
        std::vector<double> xs, ys;
        for (const auto& c : map.cells) {
            if (c.label.kind != kind) continue;
            xs.push_back(c.beta2);
            ys.push_back(c.alpha);
        }
        if (!xs.empty()) plot.point_series(xs, ys, color, 4.0);
        plot.legend_entry(color, to_string(kind));
    }
    plot.labels("regime map", "beta2", "alpha");
    plot.write(path);
}

}  // namespace triscale
