#include "fraudgraph/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fraudgraph/error.hpp"

namespace fraudgraph {

namespace {

constexpr int kWidth = 640, kHeight = 440;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

struct Range {
  double lo, hi;
  double span() const { return hi - lo; }
};

Range pad(Range r) {
  if (r.hi <= r.lo) r.hi = r.lo + 1.0;
  const double p = 0.05 * r.span();
  return {r.lo - p, r.hi + p};
}

double sx(double x, Range r) { return kLeft + (x - r.lo) / r.span() * (kWidth - kLeft - kRight); }
double sy(double y, Range r) {
  return kHeight - kBottom - (y - r.lo) / r.span() * (kHeight - kTop - kBottom);
}

void open_plot(std::ofstream& out, const std::string& title, const std::string& x_label,
               const std::string& y_label, Range xr, Range yr) {
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' font-family='sans-serif' font-size='12'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";
  // axes with a few ticks
  out << "<line x1='" << kLeft << "' y1='" << kHeight - kBottom << "' x2='" << kWidth - kRight
      << "' y2='" << kHeight - kBottom << "' stroke='black'/>\n"
      << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
      << kHeight - kBottom << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + xr.span() * i / 5.0, yv = yr.lo + yr.span() * i / 5.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", xv);
    out << "<text x='" << sx(xv, xr) << "' y='" << kHeight - kBottom + 16
        << "' text-anchor='middle'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", yv);
    out << "<text x='" << kLeft - 6 << "' y='" << sy(yv, yr) + 4 << "' text-anchor='end'>" << buf
        << "</text>\n";
  }
  out << "<text x='" << (kLeft + kWidth - kRight) / 2 << "' y='" << kHeight - 12
      << "' text-anchor='middle'>" << x_label << "</text>\n"
      << "<text x='16' y='" << (kTop + kHeight - kBottom) / 2
      << "' text-anchor='middle' transform='rotate(-90 16 " << (kTop + kHeight - kBottom) / 2
      << ")'>" << y_label << "</text>\n";
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  Range xr{1e300, -1e300}, yr{1e300, -1e300};
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xr.lo = std::min(xr.lo, x);
      xr.hi = std::max(xr.hi, x);
      yr.lo = std::min(yr.lo, y);
      yr.hi = std::max(yr.hi, y);
    }
  if (xr.lo > xr.hi) xr = {0, 1};
  if (yr.lo > yr.hi) yr = {0, 1};
  xr = pad(xr);
  yr = pad(yr);
  open_plot(out, title, x_label, y_label, xr, yr);
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (const auto& [x, y] : series[s].points) out << sx(x, xr) << ',' << sy(y, yr) << ' ';
    out << "'/>\n";
    out << "<text x='" << kWidth - kRight - 8 << "' y='" << kTop + 16 * (s + 1)
        << "' text-anchor='end' fill='" << color << "'>" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

void write_histogram(const std::string& path, const std::string& title,
                     const std::string& x_label,
                     const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                     int n_bins) {
  std::ofstream out(path);
  if (!out) fail("IoError", "cannot write " + path);
  Range xr{1e300, -1e300};
  for (const auto& [name, values] : groups)
    for (double v : values) {
      xr.lo = std::min(xr.lo, v);
      xr.hi = std::max(xr.hi, v);
    }
  if (xr.lo > xr.hi) xr = {0, 1};
  if (xr.hi <= xr.lo) xr.hi = xr.lo + 1.0;
  std::vector<std::vector<double>> hists;
  double ymax = 0.0;
  for (const auto& [name, values] : groups) {
    std::vector<double> h(n_bins, 0.0);
    for (double v : values) {
      int b = static_cast<int>((v - xr.lo) / (xr.hi - xr.lo) * n_bins);
      b = std::clamp(b, 0, n_bins - 1);
      h[b] += 1.0;
    }
    // normalize each group so minority classes stay visible
    const double total = std::max<size_t>(1, values.size());
    for (double& x : h) x /= total;
    ymax = std::max(ymax, *std::max_element(h.begin(), h.end()));
    hists.push_back(std::move(h));
  }
  Range yr = pad({0.0, ymax});
  const Range pxr = pad(xr);
  open_plot(out, title, x_label, "fraction", pxr, yr);
  const double bin_w = (xr.hi - xr.lo) / n_bins;
  for (size_t g = 0; g < hists.size(); ++g) {
    const char* color = kColors[g % std::size(kColors)];
    for (int b = 0; b < n_bins; ++b) {
      if (hists[g][b] == 0.0) continue;
      const double x0 = sx(xr.lo + b * bin_w, pxr), x1 = sx(xr.lo + (b + 1) * bin_w, pxr);
      const double y0 = sy(hists[g][b], yr), y1 = sy(0.0, yr);
      out << "<rect x='" << x0 << "' y='" << y0 << "' width='" << x1 - x0 << "' height='"
          << y1 - y0 << "' fill='" << color << "' fill-opacity='0.45'/>\n";
    }
    out << "<text x='" << kWidth - kRight - 8 << "' y='" << kTop + 16 * (g + 1)
        << "' text-anchor='end' fill='" << color << "'>" << groups[g].first << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fraudgraph
