#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "alexot/power_diagram.hpp"
#include "alexot/solver.hpp"

namespace alexot {

/// Dirichlet problem for the discrete Monge-Ampere equation: find a convex
/// piecewise-linear w on conv(boundary) with w(v_i) = g_i whose discrete
/// Hessian determinant at each interior point p_j equals A_j.
struct DmaeProblem {
  std::vector<Point2> boundary;        // v_1..v_m, in convex position
  std::vector<double> boundary_values; // g_1..g_m
  std::vector<Point2> interior;        // p_1..p_k, strictly inside
  std::vector<double> targets;         // A_1..A_k > 0

  /// Throws InvalidBoundary, InteriorPointOutside, DuplicateSites or InvalidInput.
  void validate() const;
  /// Counterclockwise hull of the boundary points.
  Polygon domain() const;
};

/// Convex piecewise-linear function given by its lifted vertices. The graph
/// is the lower boundary of conv{(points[i], values[i])}; cells are the
/// projections of its lower faces (coplanar faces merged).
struct PlConvexFunction {
  std::vector<Point2> points;
  std::vector<double> values;
  std::vector<std::vector<std::size_t>> cells;  // counterclockwise corner indices
  std::vector<Point2> gradients;                // per cell
  std::vector<double> intercepts;               // w = gradient . y + intercept on the cell
  std::vector<std::size_t> vertices;            // subdivision vertices, sorted
  Polygon domain;                               // conv(points)
  bool degenerate = false;                      // all lifted points coplanar: w is affine

  /// w(y) for y in the domain (maximum of the cell planes).
  double operator()(Point2 y) const;
  /// Cells whose closure contains y.
  std::vector<std::size_t> cells_containing(Point2 y, double eps) const;
  Polygon cell_polygon(std::size_t c) const;
  bool is_vertex(std::size_t i) const;
};

/// Legendre-Fenchel dual of u(x) = max_i (x . p_i + h_i): the convex function
/// on conv(P) whose graph is the lower hull of the lifted points (p_i, -h_i).
/// Cell gradients are the vertices of the power diagram of (p, h).
PlConvexFunction legendre_dual(std::span<const Point2> points, std::span<const double> heights);

/// Area of the convex hull of the gradients of w on the cells around the
/// given point. Throws BoundaryVertex on the domain boundary and InvalidInput
/// when the point is not one of w's points.
double discrete_hessian_det(const PlConvexFunction& w, Point2 vertex);

struct DmaeSolution {
  std::vector<double> heights;  // h_1..h_k for the interior points
  SiteSet extended;             // interior points then boundary points, boundary heights -g
  PlConvexFunction dual;
  PowerDiagram diagram;         // diagram of the extended sites clipped to box
  Polygon box;
  SolveResult solve;
};

/// Sites p_1..p_k followed by v_1..v_m, with heights h followed by -g.
SiteSet extended_sites(const DmaeProblem& problem, std::span<const double> heights);

/// Interior heights with every interior cell nonempty: Voronoi heights of the
/// interior points raised by a common t (t = 0 first, then doubling).
std::vector<double> dmae_feasible_heights(const DmaeProblem& problem);

/// Damped Newton on the interior heights (boundary heights stay -g), then the
/// dual recovery. initial_heights, when given, must be feasible.
DmaeSolution solve_dmae(const DmaeProblem& problem, const SolverConfig& config = {},
                        std::span<const double> initial_heights = {});

}  // namespace alexot
