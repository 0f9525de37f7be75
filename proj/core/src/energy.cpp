#include "alexot/energy.hpp"

#include <cmath>
#include <string>

#include "alexot/error.hpp"

namespace alexot {

namespace {

void check_targets(const SiteSet& sites, std::span<const double> targets) {
  if (targets.size() != sites.size())
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(sites.size()) + " targets");
}

double target_term(const SiteSet& sites, std::span<const double> targets) {
  std::vector<double> terms(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) terms[i] = sites.heights[i] * targets[i];
  return pairwise_sum(terms);
}

}  // namespace

SparseMatrix measure_jacobian(const PowerDiagram& diagram, const SiteSet& sites, const Density& sigma,
                              std::size_t free_count) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> diagonal(free_count, 0.0);
  triplets.reserve(2 * diagram.edges.size() + free_count);
  for (const DiagramEdge& e : diagram.edges) {
    const double value = edge_integral(e.a, e.b, sigma) / distance(sites.points[e.i], sites.points[e.j]);
    if (e.i < free_count) diagonal[e.i] += value;
    if (e.j < free_count) diagonal[e.j] += value;
    if (e.i < free_count && e.j < free_count) {
      triplets.emplace_back(static_cast<int>(e.i), static_cast<int>(e.j), -value);
      triplets.emplace_back(static_cast<int>(e.j), static_cast<int>(e.i), -value);
    }
  }
  for (std::size_t i = 0; i < free_count; ++i) triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diagonal[i]);
  SparseMatrix h(static_cast<int>(free_count), static_cast<int>(free_count));
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

EnergyReport evaluate_energy(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                             std::span<const double> targets) {
  check_targets(sites, targets);
  EnergyReport r;
  r.diagram = build_diagram(sites, domain);
  r.measures = cell_measures(r.diagram, sigma);
  r.feasible = r.diagram.all_cells_nonempty();
  r.value = linear_part_integral(r.diagram, sites, sigma) - target_term(sites, targets);
  r.gradient.resize(static_cast<Eigen::Index>(sites.size()));
  for (std::size_t i = 0; i < sites.size(); ++i) r.gradient[static_cast<Eigen::Index>(i)] = r.measures.masses[i] - targets[i];
  r.hessian = measure_jacobian(r.diagram, sites, sigma, sites.size());
  return r;
}

double energy_value(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                    std::span<const double> targets) {
  check_targets(sites, targets);
  const PowerDiagram diagram = build_diagram(sites, domain);
  return linear_part_integral(diagram, sites, sigma) - target_term(sites, targets);
}

Eigen::VectorXd energy_gradient(const SiteSet& sites, const Polygon& domain, const Density& sigma,
                                std::span<const double> targets) {
  check_targets(sites, targets);
  const MeasureVector w = cell_measures(build_diagram(sites, domain), sigma);
  Eigen::VectorXd g(static_cast<Eigen::Index>(sites.size()));
  for (std::size_t i = 0; i < sites.size(); ++i) g[static_cast<Eigen::Index>(i)] = w.masses[i] - targets[i];
  return g;
}

SparseMatrix energy_hessian(const SiteSet& sites, const Polygon& domain, const Density& sigma) {
  return measure_jacobian(build_diagram(sites, domain), sites, sigma, sites.size());
}

std::vector<double> balance_targets(std::span<const double> targets, double mass, double rel_tol) {
  double sum = 0.0;
  for (double a : targets) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidInput, "targets must be positive and finite");
    sum += a;
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidInput, "domain mass must be positive");
  if (std::abs(sum - mass) > rel_tol * mass) {
    throw Error(ErrorCode::Unbalanced, "targets sum to " + std::to_string(sum) + " but the domain mass is " +
                                           std::to_string(mass));
  }
  std::vector<double> out(targets.begin(), targets.end());
  for (double& a : out) a *= mass / sum;
  return out;
}

}  // namespace alexot
