#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "triscale/io.hpp"

using namespace triscale;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

struct TmpDir {
    fs::path dir;
    TmpDir() {
        dir = fs::temp_directory_path() / "triscale_io_test";
        fs::create_directories(dir);
    }
    std::string operator()(const char* name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("trajectory CSV: metadata preamble, header, determinism") {
    TmpDir tmp;
    const Params p = Params::preset_paper(0.8, 0.0245);
    Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 50.0, {});
    write_trajectory_csv(tmp("a.csv"), tr, p, 7);
    write_trajectory_csv(tmp("b.csv"), tr, p, 7);
    const std::string a = slurp(tmp("a.csv"));
    CHECK(a == slurp(tmp("b.csv")));  // byte-identical
    CHECK(a.find("# seed=7") != std::string::npos);
    CHECK(a.find("# alpha=0.8") != std::string::npos);
    CHECK(a.find("t,x,y,z\n") != std::string::npos);

    // a second simulation of the same config also matches byte-for-byte
    Trajectory tr2 = simulate(p, {0.4, 0.1, 0.12}, 50.0, {});
    write_trajectory_csv(tmp("c.csv"), tr2, p, 7);
    CHECK(a == slurp(tmp("c.csv")));
}

TEST_CASE("events JSON embeds the resolved parameter set and version") {
    TmpDir tmp;
    const Params p = Params::preset_paper(0.6, 0.0245);
    Trajectory tr = simulate(p, {0.4, 0.1, 0.12}, 100.0, {});
    write_events_json(tmp("ev.json"), tr, p, 3);
    auto j = nlohmann::json::parse(slurp(tmp("ev.json")));
    CHECK(j["version"] == kVersion);
    CHECK(j["seed"] == 3);
    CHECK(j["params"]["beta2"] == 0.0245);
    CHECK(j["events"].size() > 0);
    for (const auto& e : j["events"]) {
        CHECK((e["kind"] == "x-max" || e["kind"] == "x-min"));
    }
}

TEST_CASE("fmt_double round trips") {
    for (double v : {0.1, 1.0 / 3.0, 0.0245, 1e-17, 123456.789}) {
        CHECK(std::stod(fmt_double(v)) == v);
    }
}

TEST_CASE("manifold CSV carries labeled curves") {
    TmpDir tmp;
    const Params p = Params::preset_paper(0.6, 0.005);
    write_manifold_csv(tmp("m.csv"), p, fold_parametrization(p),
                       superslow_curves(p), 0);
    const std::string s = slurp(tmp("m.csv"));
    CHECK(s.find("x,y,z,label") != std::string::npos);
    CHECK(s.find(",F-") != std::string::npos);
    CHECK(s.find(",F0") != std::string::npos);
    CHECK(s.find(",F+") != std::string::npos);
    CHECK(s.find(",Z") != std::string::npos);
    CHECK(s.find(",L") != std::string::npos);
    CHECK(s.find("# fold_case=Case3") != std::string::npos);
}

TEST_CASE("SVG quick-look renders axes, series and legend") {
    TmpDir tmp;
    SvgPlot plot;
    plot.line_series({0, 1, 2}, {0.5, 0.2, 0.9}, "#123456", 1.0);
    plot.point_series({0.5, 1.5}, {0.4, 0.6}, "#abcdef", 3.0);
    plot.legend_entry("#123456", "series");
    plot.labels("title", "xlab", "ylab");
    plot.write(tmp("p.svg"));
    const std::string s = slurp(tmp("p.svg"));
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("polyline") != std::string::npos);
    CHECK(s.find("circle") != std::string::npos);
    CHECK(s.find("title") != std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}

TEST_CASE("regime CSV rows match the grid") {
    TmpDir tmp;
    const Params p = Params::preset_paper(0.75, 0.01);
    RegimeMapConfig cfg;
    cfg.t_end = 150.0;
    RegimeMap map = regime_map(p, {0.003, 0.05}, {0.6, 0.75}, cfg);
    write_regime_csv(tmp("r.csv"), map, p);
    const std::string s = slurp(tmp("r.csv"));
    int rows = 0;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line.find("beta2,") != 0) ++rows;
    CHECK(rows == 4);
}
