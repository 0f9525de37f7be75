#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "alexot/geometry.hpp"

namespace alexot {

/// Sites p_1..p_k with heights h_1..h_k. The associated potential is
/// u(x) = max_i (x . p_i + h_i); cell i is where term i attains the max.
struct SiteSet {
  std::vector<Point2> points;
  std::vector<double> heights;

  std::size_t size() const { return points.size(); }
  double affine(std::size_t i, Point2 x) const { return dot(x, points[i]) + heights[i]; }
};

struct DiagramEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  Point2 a;
  Point2 b;

  double length() const { return distance(a, b); }
};

struct BoundarySegment {
  Point2 a;
  Point2 b;
  std::size_t domain_edge = 0;  // index of the domain edge starting at vertex domain_edge
};

struct PowerDiagram {
  Polygon domain;
  double eps = 0.0;
  /// One cell per site (possibly empty), clipped to the domain.
  std::vector<Polygon> cells;
  /// Pairs i < j whose cells share a segment longer than eps.
  std::vector<DiagramEdge> edges;
  /// Per cell, the parts of its boundary lying on the domain boundary.
  std::vector<std::vector<BoundarySegment>> boundary_edges;

  std::size_t size() const { return cells.size(); }
  bool all_cells_nonempty() const;
  /// Index of the first cell whose closure contains x (nullopt outside the domain).
  std::optional<std::size_t> locate(Point2 x) const;
  /// Neighbour lists built from edges.
  std::vector<std::vector<std::size_t>> adjacency() const;
  /// Whether the nonempty cells form one connected component under edges.
  bool adjacency_connected() const;
};

/// Throws DuplicateSites when two points are within eps of each other.
void check_distinct(std::span<const Point2> points, double eps);

/// Clips the domain by { x . (p_j - p_i) <= h_i - h_j } for every j != i.
/// Cells for different sites are built concurrently when thread_count() > 1.
PowerDiagram build_diagram(const SiteSet& sites, const Polygon& domain);

/// Power-diagram weights <-> heights: h_i = -(|p_i|^2 + w_i) / 2.
std::vector<double> heights_from_weights(std::span<const Point2> points, std::span<const double> weights);
std::vector<double> weights_from_heights(std::span<const Point2> points, std::span<const double> heights);

/// Zero-weight heights h_i = -|p_i|^2 / 2, whose diagram is the Voronoi diagram.
std::vector<double> voronoi_heights(std::span<const Point2> points);

/// Heights for which every clipped cell has positive area. Tries the Voronoi
/// heights first; otherwise contracts the (unclipped, all-nonempty) Voronoi
/// arrangement toward the domain centroid by scaling its heights.
/// Throws FeasibilityFailed if no candidate verifies.
std::vector<double> feasible_heights(std::span<const Point2> points, const Polygon& domain);

}  // namespace alexot
