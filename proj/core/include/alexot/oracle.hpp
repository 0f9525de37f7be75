#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alexot/geometry.hpp"
#include "alexot/measure.hpp"
#include "alexot/power_diagram.hpp"

// Brute-force checks that share nothing with the solver beyond the geometry
// primitives and density evaluation: their own quadrature, sampling, a
// transport simplex, and difference quotients.
namespace alexot::oracle {

/// Integral of f sigma over a convex polygon by a fan of degree-5 triangle
/// rules. Exact for polynomial f sigma of total degree <= 5; grid densities
/// are handled by uniform refinement (4^refine subtriangles per fan triangle).
double quadrature(const Polygon& poly, const Density& sigma, const std::function<double(Point2)>& f, int refine = 0);
double quadrature_mass(const Polygon& poly, const Density& sigma, int refine = 0);

struct McEstimate {
  std::vector<double> masses;
  std::vector<double> std_errors;
  std::size_t samples = 0;
};

/// Uniform samples of the domain (rejection from its bounding box) weighted
/// by sigma and binned by argmax_i x . p_i + h_i. Seed-deterministic.
McEstimate mc_cell_measures(const SiteSet& sites, const Polygon& domain, const Density& sigma, std::size_t n_samples,
                            std::uint64_t seed);

struct McScalar {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of the integral of f sigma over the domain.
McScalar mc_integrate(const Polygon& domain, const Density& sigma, const std::function<double(Point2)>& f,
                      std::size_t n_samples, std::uint64_t seed);

/// Squares of an n-by-n grid over the domain's bounding box, clipped to the
/// domain. Each nonempty piece becomes an atom at its centroid.
struct GridDiscretization {
  int resolution = 0;
  std::vector<Polygon> pieces;
  std::vector<Point2> atoms;
  std::vector<double> masses;
  double scale = 1.0;  // factor applied to the raw piece masses
};

/// Piece masses are exact for uniform and affine densities and use the
/// midpoint rule for grids; all masses are then rescaled to total.
GridDiscretization discretize(const Polygon& domain, const Density& sigma, int resolution, double total);

struct TransportResult {
  double cost = 0.0;
  double dual_bound = 0.0;  // objective of a feasible dual; cost - dual_bound >= 0 is the gap
  std::size_t pivots = 0;
};

/// Exact optimal cost of moving the atoms' masses onto the targets at sites
/// with cost |x - p|^2 (network simplex). Throws Infeasible when the two
/// sides do not balance to 1e-10 relative.
TransportResult lp_transport_cost(const GridDiscretization& grid, std::span<const Point2> sites,
                                  std::span<const double> targets);

/// Dense transportation problem: supplies, demands, costs[s * demands.size() + t].
TransportResult transport_simplex(std::span<const double> supplies, std::span<const double> demands,
                                  std::span<const double> costs);

/// Cost of the plan that sends each grid piece to the sites of the cells it
/// overlaps, in proportion to the overlapping mass.
double induced_plan_cost(const GridDiscretization& grid, const PowerDiagram& diagram, std::span<const Point2> sites,
                         const Density& sigma);

struct PartitionCheck {
  bool passed = false;
  bool skipped = false;  // masses too far from the targets to be a solution
  int trials = 0;
  double min_gap = 0.0;   // smallest cost increase over all relabelings
  double cost = 0.0;      // cost of the power-cell labeling
};

/// Relabels equal-mass strips on both sides of random shared edges and checks
/// that none of the relabelings is cheaper than the power-cell assignment.
PartitionCheck random_partition_cost_check(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma,
                                           std::span<const double> targets, int n_trials, std::uint64_t seed,
                                           double mass_tol = 1e-6);

/// Cost change of moving a strip of mass mu from cell i to cell j and an
/// equal-mass strip from j to i. Strips hug the line separating the cells.
double swap_cost_delta(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma, std::size_t i,
                       std::size_t j, double mu);

/// Quadratic cost of the power cells, computed with the oracle quadrature.
double labeling_cost(const SiteSet& sites, const PowerDiagram& diagram, const Density& sigma);

struct FdReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central differences of f against gradient; relative error is measured
/// normwise, |fd - g|_inf / max(|g|_inf, floor).
FdReport fd_check_gradient(const ScalarFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& gradient, double step,
                           double floor = 1e-12);

/// Central differences of F against jacobian, entrywise relative on entries
/// with |J_ij| > floor; smaller entries only feed max_abs_error.
FdReport fd_check_jacobian(const VectorFn& F, const Eigen::VectorXd& x, const Eigen::MatrixXd& jacobian, double step,
                           double floor = 1e-6);

/// Central-difference gradient.
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double step);

}  // namespace alexot::oracle
