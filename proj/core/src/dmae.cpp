#include "alexot/dmae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "alexot/error.hpp"
#include "alexot/lower_hull.hpp"
#include "alexot/measure.hpp"

namespace alexot {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct Plane {
  Point2 gradient;
  double intercept;
};

Plane plane_through(Point2 a, double za, Point2 b, double zb, Point2 c, double zc) {
  const Point2 u = b - a, v = c - a;
  const double du = zb - za, dv = zc - za;
  const double det = cross(u, v);
  const Point2 g{(du * v.y - dv * u.y) / det, (u.x * dv - v.x * du) / det};
  return {g, za - dot(g, a)};
}

// Counterclockwise hull corners of a subset of points, as indices.
std::vector<std::size_t> hull_indices(std::span<const Point2> points, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
  });
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.size() < 3) return idx;
  std::vector<std::size_t> h(2 * idx.size());
  std::size_t k = 0;
  auto turn = [&](std::size_t o, std::size_t a, std::size_t b) { return cross(points[a] - points[o], points[b] - points[o]); };
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], idx[i]) <= 0.0) --k;
    h[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(h[k - 2], h[k - 1], idx[i]) <= 0.0) --k;
    h[k++] = idx[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

void DmaeProblem::validate() const {
  const std::size_t m = boundary.size();
  if (m < 3) throw Error(ErrorCode::InvalidBoundary, "need at least three boundary vertices");
  if (boundary_values.size() != m) throw Error(ErrorCode::InvalidInput, "one boundary value per boundary vertex");
  if (targets.size() != interior.size()) throw Error(ErrorCode::InvalidInput, "one target per interior point");
  if (interior.empty()) throw Error(ErrorCode::InvalidInput, "need at least one interior point");
  for (double g : boundary_values)
    if (!std::isfinite(g)) throw Error(ErrorCode::InvalidInput, "boundary values must be finite");
  for (double a : targets)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidInput, "targets must be positive and finite");
  for (const Point2& p : boundary)
    if (!is_finite(p)) throw Error(ErrorCode::InvalidInput, "non-finite boundary vertex");

  const Polygon omega = convex_hull(boundary);
  if (omega.size() != m || area(omega) <= 0.0)
    throw Error(ErrorCode::InvalidBoundary, "boundary vertices are not in strictly convex position");
  const double eps = geometric_tolerance(omega);
  std::vector<Point2> all(interior.begin(), interior.end());
  all.insert(all.end(), boundary.begin(), boundary.end());
  check_distinct(all, eps);
  for (std::size_t j = 0; j < interior.size(); ++j) {
    if (!is_finite(interior[j]) || !contains(omega, interior[j]) || boundary_distance(omega, interior[j]) <= eps)
      throw Error(ErrorCode::InteriorPointOutside, "interior point " + std::to_string(j) + " is not strictly inside");
  }
}

Polygon DmaeProblem::domain() const { return convex_hull(boundary); }

double PlConvexFunction::operator()(Point2 y) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < gradients.size(); ++c) best = std::max(best, dot(gradients[c], y) + intercepts[c]);
  return best;
}

Polygon PlConvexFunction::cell_polygon(std::size_t c) const {
  Polygon poly;
  for (std::size_t i : cells[c]) poly.vertices.push_back(points[i]);
  return poly;
}

std::vector<std::size_t> PlConvexFunction::cells_containing(Point2 y, double eps) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (contains(cell_polygon(c), y, eps)) out.push_back(c);
  return out;
}

bool PlConvexFunction::is_vertex(std::size_t i) const { return std::binary_search(vertices.begin(), vertices.end(), i); }

PlConvexFunction legendre_dual(std::span<const Point2> points, std::span<const double> heights) {
  if (points.size() != heights.size()) throw Error(ErrorCode::InvalidInput, "points/heights size mismatch");
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "no points");
  PlConvexFunction w;
  w.points.assign(points.begin(), points.end());
  w.values.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) w.values[i] = -heights[i];
  w.domain = convex_hull(points);
  const double eps = geometric_tolerance(w.domain);
  check_distinct(points, eps);
  if (area(w.domain) <= 0.0) throw Error(ErrorCode::InvalidInput, "points are collinear");

  const LowerHull hull = lower_hull(points, w.values);
  if (hull.degenerate) {
    // All lifted points share one plane; w is affine on a single cell.
    const std::vector<std::size_t> corners =
        hull_indices(points, [&] {
          std::vector<std::size_t> all(points.size());
          std::iota(all.begin(), all.end(), 0);
          return all;
        }());
    const Plane pl = plane_through(points[corners[0]], w.values[corners[0]], points[corners[1]], w.values[corners[1]],
                                   points[corners[2]], w.values[corners[2]]);
    w.degenerate = true;
    w.cells.push_back(corners);
    w.gradients.push_back(pl.gradient);
    w.intercepts.push_back(pl.intercept);
    w.vertices = corners;
    std::sort(w.vertices.begin(), w.vertices.end());
    return w;
  }

  const auto& tris = hull.triangles;
  std::vector<Plane> planes;
  planes.reserve(tris.size());
  for (const auto& t : tris)
    planes.push_back(plane_through(points[t[0]], w.values[t[0]], points[t[1]], w.values[t[1]], points[t[2]], w.values[t[2]]));

  // Merge edge-adjacent triangles lying in the same plane.
  double value_scale = 1.0;
  for (double v : w.values) value_scale = std::max(value_scale, std::abs(v));
  const double diam = diameter(w.domain);
  DisjointSets sets(tris.size());
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_owner;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = tris[t][e], b = tris[t][(e + 1) % 3];
      auto it = edge_owner.find({b, a});
      if (it == edge_owner.end()) {
        edge_owner[{a, b}] = t;
        continue;
      }
      const std::size_t s = it->second;
      const Plane& p1 = planes[t];
      const Plane& p2 = planes[s];
      // Compare the two planes at the far vertex of the neighbouring triangle.
      bool coplanar = true;
      for (int v = 0; v < 3 && coplanar; ++v) {
        const Point2 y = points[tris[s][v]];
        const double d = dot(p1.gradient, y) + p1.intercept - w.values[tris[s][v]];
        coplanar = std::abs(d) <= 1e-10 * value_scale + 1e-12 * diam * norm(p1.gradient);
      }
      (void)p2;
      if (coplanar) sets.unite(t, s);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < tris.size(); ++t) groups[sets.find(t)].push_back(t);
  for (const auto& [root, members] : groups) {
    std::vector<std::size_t> idx;
    Point2 g{};
    double b = 0.0;
    for (std::size_t t : members) {
      idx.insert(idx.end(), tris[t].begin(), tris[t].end());
      g = g + planes[t].gradient;
      b += planes[t].intercept;
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    w.cells.push_back(hull_indices(points, std::move(idx)));
    w.gradients.push_back(inv * g);
    w.intercepts.push_back(inv * b);
  }
  for (const auto& cell : w.cells) w.vertices.insert(w.vertices.end(), cell.begin(), cell.end());
  std::sort(w.vertices.begin(), w.vertices.end());
  w.vertices.erase(std::unique(w.vertices.begin(), w.vertices.end()), w.vertices.end());
  return w;
}

double discrete_hessian_det(const PlConvexFunction& w, Point2 vertex) {
  const double eps = geometric_tolerance(w.domain);
  const auto it = std::find_if(w.points.begin(), w.points.end(), [&](Point2 p) { return distance(p, vertex) <= eps; });
  if (it == w.points.end()) throw Error(ErrorCode::InvalidInput, "point is not a vertex of the function");
  if (boundary_distance(w.domain, vertex) <= eps)
    throw Error(ErrorCode::BoundaryVertex, "the discrete Hessian determinant is defined at interior vertices only");
  std::vector<Point2> grads;
  for (std::size_t c : w.cells_containing(vertex, eps)) grads.push_back(w.gradients[c]);
  return area(convex_hull(grads));
}

SiteSet extended_sites(const DmaeProblem& problem, std::span<const double> heights) {
  SiteSet s;
  s.points = problem.interior;
  s.points.insert(s.points.end(), problem.boundary.begin(), problem.boundary.end());
  s.heights.assign(heights.begin(), heights.end());
  for (double g : problem.boundary_values) s.heights.push_back(-g);
  return s;
}

namespace {

Polygon box_around(const Polygon& omega, double half_width) {
  const Point2 c = centroid(omega);
  return make_box(c - Point2{half_width, half_width}, c + Point2{half_width, half_width});
}

bool interior_cells_touch_box(const PowerDiagram& d, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i)
    if (!d.boundary_edges[i].empty()) return true;
  return false;
}

// Builds the extended diagram, growing the box until no interior cell reaches it.
PowerDiagram bounded_diagram(const SiteSet& sites, std::size_t k, const Polygon& omega, double& half_width, Polygon& box) {
  for (int grow = 0; grow < 60; ++grow) {
    box = box_around(omega, half_width);
    PowerDiagram d = build_diagram(sites, box);
    if (!interior_cells_touch_box(d, k)) return d;
    half_width *= 2.0;
  }
  throw Error(ErrorCode::FeasibilityFailed, "interior cells are unbounded; heights are not admissible");
}

}  // namespace

std::vector<double> dmae_feasible_heights(const DmaeProblem& problem) {
  problem.validate();
  const Polygon omega = problem.domain();
  const std::size_t k = problem.interior.size();
  const std::vector<double> base = voronoi_heights(problem.interior);
  const double diam = diameter(omega);
  double half_width = 2.0 * diam;
  Polygon box;

  std::vector<double> h = base;
  double t = 0.0;
  const double step = 1e-3 * diam * diam;
  for (int attempt = 0; attempt < 120; ++attempt) {
    for (std::size_t j = 0; j < k; ++j) h[j] = base[j] + t;
    const PowerDiagram d = bounded_diagram(extended_sites(problem, h), k, omega, half_width, box);
    bool ok = true;
    for (std::size_t j = 0; j < k && ok; ++j) ok = area(d.cells[j]) > 0.0;
    if (ok) return h;
    t = attempt == 0 ? step : 2.0 * t;
  }
  throw Error(ErrorCode::FeasibilityFailed, "could not find heights with all interior cells nonempty");
}

DmaeSolution solve_dmae(const DmaeProblem& problem, const SolverConfig& config, std::span<const double> initial_heights) {
  problem.validate();
  config.validate();
  const Polygon omega = problem.domain();
  const std::size_t k = problem.interior.size();
  double half_width = 2.0 * diameter(omega);
  Polygon box;
  const Density unit = Density::uniform(1.0);

  MeasureModel model;
  model.gauge = false;
  model.evaluate = [&](const std::vector<double>& h) {
    MeasureState s;
    s.heights = h;
    const SiteSet sites = extended_sites(problem, h);
    s.diagram = bounded_diagram(sites, k, omega, half_width, box);
    s.measures.resize(k);
    for (std::size_t j = 0; j < k; ++j) s.measures[j] = area(s.diagram.cells[j]);
    s.total_measure = pairwise_sum(s.measures);
    // Integral of u over the box, less h . A; the box only shifts it by a constant.
    double target_term = 0.0;
    for (std::size_t j = 0; j < k; ++j) target_term += h[j] * problem.targets[j];
    s.energy = linear_part_integral(s.diagram, sites, unit) - target_term;
    return s;
  };
  model.jacobian = [&](const MeasureState& s) {
    return measure_jacobian(s.diagram, extended_sites(problem, s.heights), unit, k);
  };

  std::vector<double> start;
  if (!initial_heights.empty()) {
    if (initial_heights.size() != k) throw Error(ErrorCode::InvalidInput, "one initial height per interior point");
    start.assign(initial_heights.begin(), initial_heights.end());
  } else {
    start = dmae_feasible_heights(problem);
  }

  // Cell areas carry rounding of order eps * area(omega); tiny targets must not
  // push the stopping threshold below that.
  const double mass = std::max(std::accumulate(problem.targets.begin(), problem.targets.end(), 0.0),
                               1e-6 * area(omega));
  DmaeSolution sol;
  sol.solve = run_damped_newton(model, std::move(start), problem.targets, mass, config);
  sol.heights = sol.solve.heights;
  sol.extended = extended_sites(problem, sol.heights);
  sol.diagram = sol.solve.diagram;
  sol.box = box;
  sol.dual = legendre_dual(sol.extended.points, sol.extended.heights);
  return sol;
}

}  // namespace alexot
