#ifndef COUPLED_RWM_SVG_HPP
#define COUPLED_RWM_SVG_HPP

#include <string>
#include <vector>

namespace crwm {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Draw markers at every point instead of a polyline.
  bool markers = false;
  std::vector<PlotSeries> series;
};

/// Standalone SVG document. Points that cannot be shown on a log axis
/// (nonpositive or non-finite) are skipped.
std::string render_svg(const LinePlot &plot);

} // namespace crwm

#endif
