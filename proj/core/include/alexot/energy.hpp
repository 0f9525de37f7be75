#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "alexot/measure.hpp"
#include "alexot/power_diagram.hpp"

namespace alexot {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Value, gradient and Hessian of the transport energy
///   E(h) = integral over the domain of u_h sigma dx - sum_i h_i A_i,
/// which is convex with dE/dh_i = w_i(h) - A_i and Hessian [dw_i/dh_j].
struct EnergyReport {
  double value = 0.0;
  Eigen::VectorXd gradient;
  SparseMatrix hessian;
  bool feasible = false;  // every cell has positive area
  PowerDiagram diagram;
  MeasureVector measures;
};

EnergyReport evaluate_energy(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                             std::span<const double> targets);

double energy_value(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                    std::span<const double> targets);

Eigen::VectorXd energy_gradient(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                                std::span<const double> targets);

SparseMatrix energy_hessian(const SiteSet& sites, const Polygon& domain, const Density& sigma);

/// Jacobian [dw_i/dh_j] restricted to the first free_count sites. Each shared
/// edge F between cells i and j contributes -integral_F sigma / |p_i - p_j|
/// off the diagonal; the diagonal collects the same terms over all
/// neighbours, including sites beyond free_count (pinned sites). With no
/// pinned sites every row sums to zero.
SparseMatrix measure_jacobian(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma,
                              std::size_t free_count);

/// Returns targets rescaled to sum exactly to mass when they already agree
/// to within rel_tol; throws Unbalanced otherwise. Non-positive targets
/// throw InvalidInput.
std::vector<double> balance_targets(std::span<const double> targets, double mass, double rel_tol = 1e-10);

}  // namespace alexot
