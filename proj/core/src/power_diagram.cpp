#include "alexot/power_diagram.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "alexot/error.hpp"
#include "alexot/parallel.hpp"

namespace alexot {

namespace {

// Domain edge e is labelled -(e + 1); neighbour j is labelled j.
constexpr int domain_label(std::size_t e) { return -static_cast<int>(e) - 1; }

LabeledPolygon build_cell(const SiteSet& sites, const LabeledPolygon& domain, std::size_t i, double eps) {
  LabeledPolygon cell = domain;
  const Point2 pi = sites.points[i];
  const double hi = sites.heights[i];
  for (std::size_t j = 0; j < sites.size() && !cell.empty(); ++j) {
    if (j == i) continue;
    const HalfPlane hp{sites.points[j] - pi, hi - sites.heights[j]};
    cell = clip(cell, hp, static_cast<int>(j), eps);
  }
  return cell;
}

}  // namespace

bool PowerDiagram::all_cells_nonempty() const {
  return std::none_of(cells.begin(), cells.end(), [](const Polygon& c) { return c.empty(); });
}

std::optional<std::size_t> PowerDiagram::locate(Point2 x) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (contains(cells[i], x, eps)) return i;
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> PowerDiagram::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(cells.size());
  for (const DiagramEdge& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  return adj;
}

bool PowerDiagram::adjacency_connected() const {
  const auto adj = adjacency();
  std::size_t start = cells.size();
  std::size_t nonempty = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].empty()) continue;
    ++nonempty;
    if (start == cells.size()) start = i;
  }
  if (nonempty <= 1) return true;
  std::vector<char> seen(cells.size(), 0);
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      ++reached;
      stack.push_back(j);
    }
  }
  return reached == nonempty;
}

void check_distinct(std::span<const Point2> points, double eps) {
  // Sort by x and only compare within the eps band.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].x < points[b].x; });
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size() && points[order[b]].x - points[order[a]].x <= eps; ++b) {
      if (distance(points[order[a]], points[order[b]]) <= eps) {
        throw Error(ErrorCode::DuplicateSites, "sites " + std::to_string(order[a]) + " and " +
                                                   std::to_string(order[b]) + " coincide");
      }
    }
  }
}

PowerDiagram build_diagram(const SiteSet& sites, const Polygon& domain) {
  if (sites.size() == 0) throw Error(ErrorCode::InvalidInput, "empty site set");
  if (sites.heights.size() != sites.size()) throw Error(ErrorCode::InvalidInput, "heights/points size mismatch");
  if (domain.size() < 3 || area(domain) <= 0.0) throw Error(ErrorCode::InvalidInput, "domain must be a nonempty polygon");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!is_finite(sites.points[i]) || !std::isfinite(sites.heights[i]))
      throw Error(ErrorCode::InvalidInput, "non-finite site " + std::to_string(i));
  }

  PowerDiagram diagram;
  diagram.domain = domain;
  diagram.eps = geometric_tolerance(domain);
  check_distinct(sites.points, diagram.eps);

  LabeledPolygon labeled_domain{domain.vertices, {}};
  for (std::size_t e = 0; e < domain.size(); ++e) labeled_domain.labels.push_back(domain_label(e));

  const std::size_t k = sites.size();
  std::vector<LabeledPolygon> cells(k);
  parallel_for(k, [&](std::size_t i) { cells[i] = build_cell(sites, labeled_domain, i, diagram.eps); });

  diagram.cells.resize(k);
  diagram.boundary_edges.resize(k);
  std::map<std::pair<std::size_t, std::size_t>, DiagramEdge> shared;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& v = cells[i].vertices;
    diagram.cells[i].vertices = v;
    for (std::size_t e = 0, n = v.size(); e < n; ++e) {
      const Point2 a = v[e];
      const Point2 b = v[(e + 1) % n];
      const int label = cells[i].labels[e];
      if (label < 0) {
        diagram.boundary_edges[i].push_back({a, b, static_cast<std::size_t>(-label - 1)});
        continue;
      }
      if (distance(a, b) <= diagram.eps) continue;
      const auto j = static_cast<std::size_t>(label);
      const auto key = std::minmax(i, j);
      // Orient the stored segment as seen from the lower-index cell.
      DiagramEdge edge{key.first, key.second, i < j ? a : b, i < j ? b : a};
      auto [it, inserted] = shared.try_emplace(key, edge);
      if (!inserted && edge.length() > it->second.length()) it->second = edge;
    }
  }
  diagram.edges.reserve(shared.size());
  for (auto& [key, edge] : shared) diagram.edges.push_back(edge);
  return diagram;
}

std::vector<double> heights_from_weights(std::span<const Point2> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw Error(ErrorCode::InvalidInput, "points/weights size mismatch");
  std::vector<double> h(points.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = -0.5 * (squared_norm(points[i]) + weights[i]);
  return h;
}

std::vector<double> weights_from_heights(std::span<const Point2> points, std::span<const double> heights) {
  if (points.size() != heights.size()) throw Error(ErrorCode::InvalidInput, "points/heights size mismatch");
  std::vector<double> w(points.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = -2.0 * heights[i] - squared_norm(points[i]);
  return w;
}

std::vector<double> voronoi_heights(std::span<const Point2> points) {
  std::vector<double> zero(points.size(), 0.0);
  return heights_from_weights(points, zero);
}

std::vector<double> feasible_heights(std::span<const Point2> points, const Polygon& domain) {
  const std::size_t k = points.size();
  if (k == 0) throw Error(ErrorCode::InvalidInput, "no sites");
  if (k == 1) return {0.0};
  check_distinct(points, geometric_tolerance(domain));

  SiteSet sites{{points.begin(), points.end()}, voronoi_heights(points)};
  auto verified = [&] { return build_diagram(sites, domain).all_cells_nonempty(); };
  if (verified()) return sites.heights;

  // Every Voronoi cell in the plane contains a disc around its site. With
  // y = x - c, scaling the centred heights by lambda scales every cell by
  // lambda about c, so small lambda pulls a piece of each cell into the domain.
  const Point2 c = centroid(domain);
  std::vector<double> centred(k);
  for (std::size_t i = 0; i < k; ++i) centred[i] = dot(c, points[i]) - 0.5 * squared_norm(points[i]);
  double lambda = 1.0;
  for (int attempt = 0; attempt < 200; ++attempt, lambda *= 0.5) {
    for (std::size_t i = 0; i < k; ++i) sites.heights[i] = lambda * centred[i] - dot(c, points[i]);
    if (verified()) return sites.heights;
  }
  throw Error(ErrorCode::FeasibilityFailed, "could not find heights with all cells nonempty");
}

}  // namespace alexot
