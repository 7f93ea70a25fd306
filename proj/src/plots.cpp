#include "mcpilot/plots.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcpilot/io.hpp"

namespace mcpilot {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string scatter_svg(const EvalReport& report, const TargetDomain& domain,
                        const std::string& title, const std::vector<Vec3>& training) {
  const double W = 480, H = 480, pad = 40;
  const double x_lo = 0.0, x_hi = domain.l_max + 0.2;
  const double y_ext = domain.l_max * std::sin(domain.gamma_max) + 0.2;
  const double scale = std::min((W - 2 * pad) / (x_hi - x_lo), (H - 2 * pad) / (2 * y_ext));
  // World x points up the page, world y to the left, as seen from above.
  auto px = [&](double y) { return W / 2 - y * scale; };
  auto py = [&](double x) { return H - pad - (x - x_lo) * scale; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << " (accuracy " << fmt9(report.accuracy) << ")</text>\n";

  // Domain boundary: two arcs and two rays.
  const int n = 64;
  s << "<path fill=\"none\" stroke=\"#999\" d=\"";
  for (int i = 0; i <= n; ++i) {
    const double g = -domain.gamma_max + 2 * domain.gamma_max * i / n;
    s << (i == 0 ? "M" : "L") << fmt9(px(domain.l_max * std::sin(g))) << ","
      << fmt9(py(domain.l_max * std::cos(g))) << " ";
  }
  for (int i = n; i >= 0; --i) {
    const double g = -domain.gamma_max + 2 * domain.gamma_max * i / n;
    s << "L" << fmt9(px(domain.l_min * std::sin(g))) << "," << fmt9(py(domain.l_min * std::cos(g)))
      << " ";
  }
  s << "Z\"/>\n";
  s << "<circle cx=\"" << fmt9(px(0)) << "\" cy=\"" << fmt9(py(0))
    << "\" r=\"4\" fill=\"#333\"/>\n";

  for (const auto& p : training) {
    s << "<circle cx=\"" << fmt9(px(p.y())) << "\" cy=\"" << fmt9(py(p.x()))
      << "\" r=\"3\" fill=\"black\"/>\n";
  }
  for (const auto& r : report.rows) {
    const char* colour = r.hit ? "#2a2" : "#d22";
    s << "<circle cx=\"" << fmt9(px(r.target.y)) << "\" cy=\"" << fmt9(py(r.target.x))
      << "\" r=\"" << fmt9(0.1 * scale) << "\" fill=\"" << colour
      << "\" fill-opacity=\"0.35\" stroke=\"" << colour << "\"/>\n";
    s << "<line x1=\"" << fmt9(px(r.target.y)) << "\" y1=\"" << fmt9(py(r.target.x))
      << "\" x2=\"" << fmt9(px(r.landing.y())) << "\" y2=\"" << fmt9(py(r.landing.x()))
      << "\" stroke=\"#555\" stroke-width=\"0.8\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string box_svg(const std::vector<std::pair<std::string, std::vector<double>>>& groups,
                    const std::string& title, const std::string& y_label) {
  const double W = 120.0 + 100.0 * static_cast<double>(groups.size()), H = 360, pad = 50;
  double lo = 0.0, hi = 1.0;
  for (const auto& [name, v] : groups) {
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  auto py = [&](double v) { return H - pad - (v - lo) / (hi - lo) * (H - 2 * pad); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  s << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
    << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape(y_label) << "</text>\n";
  s << "<line x1=\"" << pad << "\" y1=\"" << py(lo) << "\" x2=\"" << pad << "\" y2=\"" << py(hi)
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    s << "<text x=\"" << pad - 4 << "\" y=\"" << fmt9(py(v) + 4)
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt9(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& [name, v] = groups[i];
    const double cx = pad + 60.0 + 100.0 * static_cast<double>(i);
    s << "<text x=\"" << cx << "\" y=\"" << H - pad + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(name) << "</text>\n";
    if (v.empty()) continue;
    const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5), q3 = quantile(v, 0.75);
    const double mn = *std::min_element(v.begin(), v.end());
    const double mx = *std::max_element(v.begin(), v.end());
    s << "<line x1=\"" << cx << "\" y1=\"" << fmt9(py(mn)) << "\" x2=\"" << cx << "\" y2=\""
      << fmt9(py(mx)) << "\" stroke=\"black\"/>\n";
    s << "<rect x=\"" << cx - 25 << "\" y=\"" << fmt9(py(q3)) << "\" width=\"50\" height=\""
      << fmt9(std::max(py(q1) - py(q3), 1.0)) << "\" fill=\"#9cf\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << cx - 25 << "\" y1=\"" << fmt9(py(q2)) << "\" x2=\"" << cx + 25
      << "\" y2=\"" << fmt9(py(q2)) << "\" stroke=\"#c00\" stroke-width=\"2\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace mcpilot
