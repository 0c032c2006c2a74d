#pragma once

#include <string>
#include <vector>

#include "triscale/classify.hpp"
#include "triscale/continuation.hpp"
#include "triscale/fastsub.hpp"
#include "triscale/integrate.hpp"
#include "triscale/manifolds.hpp"
#include "triscale/model.hpp"
#include "triscale/reduced.hpp"

namespace triscale {

/// Shortest round-trippable decimal representation ("%.17g").
std::string fmt_double(double v);

/// '# key=value' metadata preamble embedded in every CSV artifact.
std::string csv_metadata(const Params& p, unsigned seed);

void write_trajectory_csv(const std::string& path, const Trajectory& tr,
                          const Params& p, unsigned seed = 0);
void write_events_json(const std::string& path, const Trajectory& tr,
                       const Params& p, unsigned seed = 0);
void write_branch_csv(const std::string& path, const Branch& br, const Params& p,
                      unsigned seed = 0);
void write_bifpoints_json(const std::string& path, const std::vector<BifPoint>& pts,
                          const Params& p, unsigned seed = 0);
void write_manifold_csv(const std::string& path, const Params& p,
                        const FoldCurve& fc, const SuperslowCurves& sc,
                        unsigned seed = 0);
void write_regime_csv(const std::string& path, const RegimeMap& map, const Params& p);
void write_folded_singularities_json(const std::string& path,
                                     const std::vector<FoldedSingularity>& fs,
                                     const Params& p);
std::string folded_singularities_table(const std::vector<FoldedSingularity>& fs);

/// Minimal plot writer for schematic quick-looks (CSV remains ground truth).
class SvgPlot {
  public:
    SvgPlot(int width = 860, int height = 560);
    void line_series(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& color, double width = 1.0);
    void point_series(const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::string& color, double radius = 2.0);
    void labels(const std::string& title, const std::string& xlabel,
                const std::string& ylabel);
    void legend_entry(const std::string& color, const std::string& text);
    void write(const std::string& path) const;

  private:
    struct Series {
        std::vector<double> xs, ys;
        std::string color;
        double w;
        bool points;
    };
    int w_, h_;
    std::vector<Series> series_;
    std::vector<std::pair<std::string, std::string>> legend_;
    std::string title_, xlabel_, ylabel_;
};

void write_trajectory_svg(const std::string& path, const Trajectory& tr,
                          const std::string& title);
void write_regime_svg(const std::string& path, const RegimeMap& map);

}  // namespace triscale
