#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "alexot/cli/cli.hpp"

namespace alexot::cli {

namespace {

// Maps problem coordinates to a square canvas with y pointing up.
class Canvas {
 public:
  explicit Canvas(std::span<const Point2> pts) {
    const auto [lo, hi] = bounding_box(pts);
    lo_ = lo;
    hi_ = hi;
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-12});
    scale_ = (kSize - 2 * kMargin) / extent;
  }

  std::string x(double v) const { return num(kMargin + (v - lo_.x) * scale_); }
  std::string y(double v) const { return num(kMargin + (hi_.y - v) * scale_); }
  std::string xy(Point2 p) const { return x(p.x) + "," + y(p.y); }
  int width() const { return static_cast<int>(std::ceil(2 * kMargin + (hi_.x - lo_.x) * scale_)); }
  int height() const { return static_cast<int>(std::ceil(2 * kMargin + (hi_.y - lo_.y) * scale_)); }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
  }

 private:
  static constexpr double kSize = 640.0;
  static constexpr double kMargin = 20.0;
  Point2 lo_, hi_;
  double scale_ = 1.0;
};

std::string fill_color(std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,60%%,78%%)", std::fmod(137.50776405003785 * static_cast<double>(i), 360.0));
  return buf;
}

std::string path_of(const Canvas& c, std::span<const Point2> poly) {
  std::string d;
  for (std::size_t v = 0; v < poly.size(); ++v) d += (v == 0 ? "M" : " L") + c.xy(poly[v]);
  return d + " Z";
}

void line(std::ostream& out, const Canvas& c, const char* cls, Point2 a, Point2 b, std::size_t i, std::size_t j,
          const char* extra = "") {
  out << "    <line class=\"" << cls << "\" data-i=\"" << i << "\" data-j=\"" << j << "\" x1=\"" << c.x(a.x)
      << "\" y1=\"" << c.y(a.y) << "\" x2=\"" << c.x(b.x) << "\" y2=\"" << c.y(b.y) << '"' << extra << "/>\n";
}

void header(std::ostream& out, const Canvas& c, bool arrows) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width() << "\" height=\"" << c.height()
      << "\" viewBox=\"0 0 " << c.width() << ' ' << c.height() << "\">\n"
      << "  <style>.edge{stroke:#333;stroke-width:1}.dual-edge{stroke:#c0392b;stroke-width:1;stroke-dasharray:4 3}"
         ".arrow{stroke:#1f4e8c;stroke-width:1.2}.omega{fill:none;stroke:#000;stroke-width:2}"
         ".site{fill:#000}.boundary-site{fill:#fff;stroke:#000}</style>\n";
  if (arrows)
    out << "  <defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
           "markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 Z\" fill=\"#1f4e8c\"/></marker></defs>\n";
}

void render_transport(std::ostream& out, const LoadedSolution& s, bool dual, bool arrows) {
  const Problem& p = s.problem;
  const PowerDiagram diagram = build_diagram(SiteSet{p.points, s.heights}, p.omega);
  std::vector<Point2> frame = p.omega.vertices;
  frame.insert(frame.end(), p.points.begin(), p.points.end());
  const Canvas c(frame);
  header(out, c, arrows);

  out << "  <g id=\"cells\">\n";
  for (std::size_t i = 0; i < diagram.size(); ++i)
    if (!diagram.cells[i].empty())
      out << "    <path class=\"cell\" data-site=\"" << i << "\" fill=\"" << fill_color(i) << "\" d=\""
          << path_of(c, diagram.cells[i].vertices) << "\"/>\n";
  out << "  </g>\n  <g id=\"edges\">\n";
  for (const DiagramEdge& e : diagram.edges) line(out, c, "edge", e.a, e.b, e.i, e.j);
  out << "  </g>\n";
  out << "  <path class=\"omega\" d=\"" << path_of(c, p.omega.vertices) << "\"/>\n";
  if (dual) {
    out << "  <g id=\"dual\">\n";
    for (const DiagramEdge& e : diagram.edges) line(out, c, "dual-edge", p.points[e.i], p.points[e.j], e.i, e.j);
    out << "  </g>\n";
  }
  if (arrows) {
    out << "  <g id=\"arrows\">\n";
    for (std::size_t i = 0; i < diagram.size(); ++i)
      if (!diagram.cells[i].empty())
        line(out, c, "arrow", centroid(diagram.cells[i]), p.points[i], i, i, " marker-end=\"url(#head)\"");
    out << "  </g>\n";
  }
  out << "  <g id=\"sites\">\n";
  for (std::size_t i = 0; i < p.points.size(); ++i)
    out << "    <circle class=\"site\" data-site=\"" << i << "\" cx=\"" << c.x(p.points[i].x) << "\" cy=\""
        << c.y(p.points[i].y) << "\" r=\"3\"/>\n";
  out << "  </g>\n</svg>\n";
}

// The subdivision of conv(boundary) by the dual's linearity regions.
void render_dmae(std::ostream& out, const LoadedSolution& s) {
  const Problem& p = s.problem;
  const SiteSet ext = extended_sites(p.dmae, s.heights);
  const PlConvexFunction w = legendre_dual(ext.points, ext.heights);
  const Canvas c(ext.points);
  header(out, c, false);

  std::map<std::pair<std::size_t, std::size_t>, int> uses;
  out << "  <g id=\"cells\">\n";
  for (std::size_t f = 0; f < w.cells.size(); ++f) {
    const auto& cell = w.cells[f];
    std::vector<Point2> poly;
    for (std::size_t v = 0; v < cell.size(); ++v) {
      poly.push_back(w.points[cell[v]]);
      const std::size_t a = cell[v], b = cell[(v + 1) % cell.size()];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
    out << "    <path class=\"cell\" data-site=\"" << f << "\" fill=\"" << fill_color(f) << "\" d=\"" << path_of(c, poly)
        << "\"/>\n";
  }
  out << "  </g>\n  <g id=\"edges\">\n";
  for (const auto& [key, count] : uses)
    if (count == 2) line(out, c, "edge", w.points[key.first], w.points[key.second], key.first, key.second);
  out << "  </g>\n";
  out << "  <path class=\"omega\" d=\"" << path_of(c, p.omega.vertices) << "\"/>\n";
  out << "  <g id=\"sites\">\n";
  const std::size_t k = p.dmae.interior.size();
  for (std::size_t i = 0; i < ext.points.size(); ++i)
    out << "    <circle class=\"" << (i < k ? "site" : "boundary-site") << "\" data-site=\"" << i << "\" cx=\""
        << c.x(ext.points[i].x) << "\" cy=\"" << c.y(ext.points[i].y) << "\" r=\"3\"/>\n";
  out << "  </g>\n</svg>\n";
}

}  // namespace

std::string render_svg(const LoadedSolution& solution, bool dual, bool arrows) {
  std::ostringstream out;
  if (solution.problem.kind == ProblemKind::Transport)
    render_transport(out, solution, dual, arrows);
  else
    render_dmae(out, solution);
  return out.str();
}

}  // namespace alexot::cli
