#include "kirchnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace kirchnet {

namespace {

constexpr double kWidth = 720.0;
constexpr double kMargin = 40.0;
constexpr double kMassHeight = 200.0;
constexpr double kPanelWidth = 160.0;
constexpr double kPanelHeight = 110.0;
constexpr double kPanelGap = 16.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Range padded so a constant series still gets a visible band.
std::pair<double, double> padded(double lo, double hi) {
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(1e-3, 0.05 * std::abs(hi));
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void frame(std::ostream& out, double x, double y, double w, double h) {
  out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#888\"/>\n";
}

void text(std::ostream& out, double x, double y, const std::string& s, const char* anchor = "start") {
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"11\" text-anchor=\""
      << anchor << "\">" << escape(s) << "</text>\n";
}

}  // namespace

void write_summary_svg(std::ostream& out, const std::vector<std::pair<double, double>>& mass,
                       const DensityState& state) {
  const Network& net = state.network();
  const std::size_t n_edges = net.edge_count();
  const auto per_row = static_cast<std::size_t>((kWidth - kMargin) / (kPanelWidth + kPanelGap));
  const std::size_t rows = (n_edges + per_row - 1) / per_row;
  const double panels_top = kMargin + kMassHeight + 2.0 * kMargin;
  const double height = panels_top + static_cast<double>(rows) * (kPanelHeight + 2.0 * kPanelGap) + kMargin;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Mass over time.
  const double px = kMargin + 30.0;
  const double pw = kWidth - px - kMargin;
  frame(out, px, kMargin, pw, kMassHeight);
  text(out, px, kMargin - 8.0, "total mass");
  if (!mass.empty()) {
    double lo = mass.front().second, hi = lo;
    for (const auto& [t, m] : mass) lo = std::min(lo, m), hi = std::max(hi, m);
    const auto [ylo, yhi] = padded(lo, hi);
    const double t0 = mass.front().first;
    const double t1 = std::max(mass.back().first, t0 + 1e-300);
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, m] : mass) {
      const double x = px + pw * (t - t0) / (t1 - t0);
      const double y = kMargin + kMassHeight * (1.0 - (m - ylo) / (yhi - ylo));
      out << num(x) << ',' << num(y) << ' ';
    }
    out << "\"/>\n";
    text(out, px - 4.0, kMargin + 10.0, label(yhi), "end");
    text(out, px - 4.0, kMargin + kMassHeight, label(ylo), "end");
    text(out, px, kMargin + kMassHeight + 14.0, "t = " + label(t0));
    text(out, px + pw, kMargin + kMassHeight + 14.0, "t = " + label(mass.back().first), "end");
  }

  // Final density, one panel per edge on a shared vertical scale.
  double dmax = 0.0, dmin = 0.0;
  for (const auto& cells : state.density())
    for (double v : cells) dmax = std::max(dmax, v), dmin = std::min(dmin, v);
  const auto [ylo, yhi] = padded(dmin, dmax);
  text(out, kMargin, panels_top - 16.0,
       "density at t = " + label(state.time()) + " (range " + label(ylo) + " to " + label(yhi) + ")");
  for (std::size_t e = 0; e < n_edges; ++e) {
    const double x0 = kMargin + static_cast<double>(e % per_row) * (kPanelWidth + kPanelGap);
    const double y0 = panels_top + static_cast<double>(e / per_row) * (kPanelHeight + 2.0 * kPanelGap);
    frame(out, x0, y0, kPanelWidth, kPanelHeight);
    const Edge& ed = net.edge(e);
    text(out, x0, y0 + kPanelHeight + 13.0,
         "edge " + ed.key + ": " + net.vertex_id(ed.tail) + " -> " + net.vertex_id(ed.head));
    const auto cells = state.cells(e);
    const double cw = kPanelWidth / static_cast<double>(cells.size());
    out << "<polyline fill=\"none\" stroke=\"#b8431f\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double y = y0 + kPanelHeight * (1.0 - (cells[i] - ylo) / (yhi - ylo));
      out << num(x0 + cw * static_cast<double>(i)) << ',' << num(y) << ' '
          << num(x0 + cw * static_cast<double>(i + 1)) << ',' << num(y) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace kirchnet
