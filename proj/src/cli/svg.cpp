#include "coupled_rwm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace crwm {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

const char *const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                "#bcbd22", "#17becf"};

std::string escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
  double unit(double v) const { return (transform(v) - lo) / (hi - lo); }
};

Axis fit_axis(bool log, const std::vector<double> &values) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values)
    if (a.usable(v)) {
      lo = std::min(lo, a.transform(v));
      hi = std::max(hi, a.transform(v));
    }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::string number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(4);
  os << v;
  return os.str();
}

} // namespace

std::string render_svg(const LinePlot &plot) {
  std::vector<double> xs, ys;
  for (const auto &s : plot.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = fit_axis(plot.log_x, xs);
  const Axis ay = fit_axis(plot.log_y, ys);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.unit(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.unit(v)) * ph; };

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" "
     << "font-size=\"14\">" << escape(plot.title) << "</text>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Five ticks per axis, in transformed coordinates.
  for (int i = 0; i <= 4; ++i) {
    const double tx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    const double vx = ax.log ? std::pow(10.0, tx) : tx;
    const double sx = kLeft + pw * i / 4.0;
    os << "<line x1=\"" << sx << "\" y1=\"" << kTop + ph << "\" x2=\"" << sx
       << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << sx << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << number(vx) << "</text>\n";
    const double ty = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double vy = ay.log ? std::pow(10.0, ty) : ty;
    const double sy = kTop + ph - ph * i / 4.0;
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy << "\" x2=\"" << kLeft
       << "\" y2=\"" << sy << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy + 4
       << "\" text-anchor=\"end\">" << number(vy) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(plot.x_label)
     << (ax.log ? " (log)" : "") << "</text>\n"
     << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label)
     << (ay.log ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto &s = plot.series[k];
    const char *colour = kPalette[k % std::size(kPalette)];
    const auto n = std::min(s.x.size(), s.y.size());
    if (plot.markers) {
      for (std::size_t i = 0; i < n; ++i)
        if (ax.usable(s.x[i]) && ay.usable(s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
             << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << colour
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i)
      if (ax.usable(s.x[i]) && ay.usable(s.y[i]))
        os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 10 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly
       << "\" x2=\"" << kWidth - kRight + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kWidth - kRight + 35 << "\" y=\"" << ly + 4 << "\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace crwm
