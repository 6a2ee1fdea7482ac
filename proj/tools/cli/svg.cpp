#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cli/output.hpp"

namespace eegx::cli {
namespace {

std::string escape(const std::string& s) {
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

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           const std::vector<LineSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 55;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (double v : x) {
    if (!std::isfinite(v)) continue;
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const auto& s : series)
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0, yv = ymin + (ymax - ymin) * k / 4.0;
    o << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
      points.clear();
    };
    const std::size_t n = std::min(x.size(), series[s].y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(series[s].y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(x[i])) + "," + fixed(py(series[s].y[i]));
    }
    flush();
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (s + 1) << "\" text-anchor=\"end\" fill=\"" << colour
      << "\">" << escape(series[s].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string chi_heatmap_svg(const ChiMatrix& m, const std::string& title) {
  const std::size_t c = m.size();
  const double cell = c > 12 ? 24 : 36, L = 60, T = 70;
  const double W = L + cell * static_cast<double>(c) + 90, H = T + cell * static_cast<double>(c) + 20;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < c; ++i) {
    const double y = T + cell * static_cast<double>(i), x = L + cell * static_cast<double>(i);
    o << "<text x=\"" << L - 4 << "\" y=\"" << fixed(y + cell / 2 + 4) << "\" text-anchor=\"end\">" << escape(m.channels[i]) << "</text>\n";
    o << "<text x=\"" << fixed(x + cell / 2) << "\" y=\"" << T - 6 << "\" text-anchor=\"start\" transform=\"rotate(-60 "
      << fixed(x + cell / 2) << " " << T - 6 << ")\">" << escape(m.channels[i]) << "</text>\n";
    for (std::size_t j = 0; j < c; ++j) {
      const auto& e = m.at(i, j);
      std::string fill = "#bbbbbb";
      if (e.status != ChiStatus::sparse) {
        const double v = std::clamp(e.chi, 0.0, 1.0);
        const int g = static_cast<int>(std::lround(255.0 * (1.0 - v)));
        char buf[16];
        std::snprintf(buf, sizeof buf, "#ff%02x%02x", g, g);
        fill = buf;
      }
      o << "<rect x=\"" << fixed(L + cell * static_cast<double>(j)) << "\" y=\"" << fixed(y) << "\" width=\"" << cell
        << "\" height=\"" << cell << "\" fill=\"" << fill << "\" stroke=\"white\"><title>" << escape(m.channels[i]) << "-"
        << escape(m.channels[j]) << ": " << format_number(e.chi) << "</title></rect>\n";
    }
  }
  const double lx = L + cell * static_cast<double>(c) + 20;
  for (int k = 0; k <= 10; ++k) {
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - k / 10.0)));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#ff%02x%02x", g, g);
    o << "<rect x=\"" << lx << "\" y=\"" << fixed(T + 12.0 * (10 - k)) << "\" width=\"14\" height=\"12\" fill=\"" << buf << "\"/>\n";
  }
  o << "<text x=\"" << lx + 18 << "\" y=\"" << T + 10 << "\">1</text>\n";
  o << "<text x=\"" << lx + 18 << "\" y=\"" << T + 130 << "\">0</text>\n";
  o << "<text x=\"" << lx << "\" y=\"" << T - 8 << "\">chi</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace eegx::cli
