#include "triscale/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace triscale {

Params Params::preset_paper(double alpha, double beta2) {
    Params p;
    p.alpha = alpha;
    p.beta2 = beta2;
    p.beta1 = 0.1;
    p.delta1 = 0.15;
    p.delta2 = 0.35;
    p.delta3 = 0.65;
    p.gamma1 = 4.1;
    p.gamma2 = 15.0;
    p.epsilon = 0.05;
    p.delta = 0.1;
    return p;
}

std::vector<Warning> Params::validate() const {
    if (!(epsilon > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("epsilon and delta must be positive");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
        throw std::invalid_argument("gamma1 and gamma2 must be positive");
    if (!(alpha >= 0.0) || !(alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1]");
    if (!(beta1 > 0.0))
        throw std::invalid_argument("beta1 must be positive");

    std::vector<Warning> w;
    if (epsilon > 0.5)
        w.push_back({"A", "epsilon > 0.5: timescale separation assumption is weak"});
    if (delta > 0.5)
        w.push_back({"A", "delta > 0.5: timescale separation assumption is weak"});
    if (beta1 >= 1.0)
        w.push_back({"C", "beta1 >= 1 violates the efficient-predator assumption"});
    if (beta2 <= 0.0 || beta2 >= 1.0)
        w.push_back({"C", "beta2 outside (0,1): nonphysical region"});
    auto chk = [&w](double v, const char* name) {
        if (v <= 0.0 || v >= 1.0) {
            w.push_back({"B", std::string(name) + " outside (0,1): growth/death balance violated"});
        }
    };
    chk(delta1, "delta1");
    chk(delta2, "delta2");
    chk(delta3, "delta3");
    return w;
}

NondimResult nondimensionalize(const DimensionalParams& dp) {
    const double pos[] = {dp.r, dp.K, dp.p1, dp.H1, dp.b1, dp.d1, dp.m1,
                          dp.p2, dp.H2, dp.b2, dp.d2, dp.q, dp.d3, dp.m2};
    for (double v : pos)
        if (!(v > 0.0)) throw std::invalid_argument("dimensional rates and densities must be positive");
    if (!(dp.alpha >= 0.0) || !(dp.alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1]");

    NondimResult r;
    auto& sc = r.scales;
    sc.epsilon1 = dp.b1 * dp.p1 / dp.r;
    sc.epsilon2 = dp.b2 * dp.p2 / dp.r;
    sc.epsilon3 = dp.q / dp.r;
    sc.Y0 = dp.r * dp.K / dp.p1;
    sc.Z0 = dp.r * dp.K / dp.p2;

    Params& p = r.params;
    p.alpha = dp.alpha;
    p.beta1 = dp.H1 / dp.K;
    const double h2 = dp.H2 / dp.K;
    p.beta2 = h2 * h2;  // saturation constant of the sigmoidal response
    p.delta1 = dp.d1 / (dp.b1 * dp.p1);
    p.delta2 = dp.d2 / (dp.b2 * dp.p2);
    p.delta3 = dp.d3 / dp.q;
    p.gamma1 = dp.m1 * sc.Y0 / (dp.b1 * dp.p1);
    p.gamma2 = dp.m2 * sc.Z0;
    p.epsilon = sc.epsilon1;
    p.delta = sc.epsilon2 / sc.epsilon1;

    if (sc.epsilon2 > sc.epsilon1)
        r.warnings.push_back({"A", "epsilon2 > epsilon1: rate ordering assumption violated"});
    if (sc.epsilon1 > 1.0)
        r.warnings.push_back({"A", "epsilon1 > 1: prey is not the fastest component"});
    if (std::abs(sc.epsilon3 - sc.epsilon2) > 1e-12 * std::max(sc.epsilon2, sc.epsilon3))
        r.warnings.push_back({"A", "q != b2*p2: epsilon3 reported separately from epsilon2"});
    for (auto& w : r.params.validate()) r.warnings.push_back(w);
    return r;
}

namespace {

const std::array<const char*, 10> kKeys = {
    "alpha", "beta1", "beta2", "delta1", "delta2",
    "delta3", "gamma1", "gamma2", "epsilon", "delta"};

double* field(Params& p, const std::string& key) {
    if (key == "alpha") return &p.alpha;
    if (key == "beta1") return &p.beta1;
    if (key == "beta2") return &p.beta2;
    if (key == "delta1") return &p.delta1;
    if (key == "delta2") return &p.delta2;
    if (key == "delta3") return &p.delta3;
    if (key == "gamma1") return &p.gamma1;
    if (key == "gamma2") return &p.gamma2;
    if (key == "epsilon") return &p.epsilon;
    if (key == "delta") return &p.delta;
    return nullptr;
}

}  // namespace

Params parse_params(std::istream& in) {
    Params p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        double* f = field(p, key);
        if (!f) throw std::invalid_argument("unknown parameter key '" + key + "'");
        size_t used = 0;
        *f = std::stod(val, &used);
        if (used != val.size())
            throw std::invalid_argument("bad numeric value for '" + key + "'");
    }
    return p;
}

Params parse_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_params(in);
}

std::string serialize_params(const Params& p) {
    Params copy = p;
    std::ostringstream out;
    char buf[64];
    for (const char* key : kKeys) {
        std::snprintf(buf, sizeof(buf), "%.17g", *field(copy, key));
        out << key << "=" << buf << "\n";
    }
    return out.str();
}

}  // namespace triscale
