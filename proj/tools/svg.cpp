#include "svg.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>

#include "stlsmooth/text.hpp"

namespace stlsmooth::cli {
namespace {

constexpr double kScale = 40.0;  // pixels per unit
constexpr double kMargin = 0.5;  // world units

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

bool is_obstacle(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  return name.rfind("obs", 0) == 0;
}

// Region extent along a dim, falling back to the plot extent when unbounded.
std::pair<double, double> extent(const Box& box, std::size_t dim, double lo, double hi) {
  auto it = box.bounds.find(dim);
  if (it == box.bounds.end()) return {lo, hi};
  return {std::max(it->second.first, lo), std::min(it->second.second, hi)};
}

}  // namespace

std::string render_svg(const RegionTable& regions, const std::vector<Signal>& trajectories) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
  auto grow = [](double& lo, double& hi, double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& [name, box] : regions) {
    for (const auto& [dim, range] : box.bounds) {
      if (dim > 1) continue;
      double& lo = dim == 0 ? x0 : y0;
      double& hi = dim == 0 ? x1 : y1;
      grow(lo, hi, range.first);
      grow(lo, hi, range.second);
    }
  }
  for (const auto& y : trajectories) {
    if (y.dim() < 2) continue;
    for (std::size_t t = 0; t < y.length(); ++t) {
      grow(x0, x1, y(t, 0));
      grow(y0, y1, y(t, 1));
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
  if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
  x0 -= kMargin;
  x1 += kMargin;
  y0 -= kMargin;
  y1 += kMargin;

  auto px = [&](double x) { return format_double((x - x0) * kScale); };
  auto py = [&](double y) { return format_double((y1 - y) * kScale); };  // y axis up

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double((x1 - x0) * kScale)
      << "\" height=\"" << format_double((y1 - y0) * kScale) << "\">\n";
  for (const auto& [name, box] : regions) {
    const auto [rx0, rx1] = extent(box, 0, x0, x1);
    const auto [ry0, ry1] = extent(box, 1, y0, y1);
    const char* fill = is_obstacle(name) ? "#d62728" : "#2ca02c";
    out << "  <rect class=\"region\" data-name=\"" << escape(name) << "\" x=\"" << px(rx0) << "\" y=\"" << py(ry1)
        << "\" width=\"" << format_double((rx1 - rx0) * kScale) << "\" height=\""
        << format_double((ry1 - ry0) * kScale) << "\" fill=\"" << fill << "\" fill-opacity=\"0.4\" stroke=\""
        << fill << "\"/>\n";
    out << "  <text x=\"" << px(rx0) << "\" y=\"" << py(ry1) << "\" font-size=\"10\">" << escape(name)
        << "</text>\n";
  }
  for (const auto& y : trajectories) {
    if (y.dim() < 2) continue;
    out << "  <polyline class=\"trajectory\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t t = 0; t < y.length(); ++t) out << (t ? " " : "") << px(y(t, 0)) << ',' << py(y(t, 1));
    out << "\"/>\n";
    for (std::size_t t = 0; t < y.length(); ++t) {
      out << "  <circle cx=\"" << px(y(t, 0)) << "\" cy=\"" << py(y(t, 1)) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace stlsmooth::cli
