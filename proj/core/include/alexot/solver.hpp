#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "alexot/energy.hpp"

namespace alexot {

struct SolverConfig {
  double tol = 1e-10;            // stop when |w(h) - A|_inf <= tol * mass
  int max_iters = 100;
  double min_step = 1e-12;       // smallest step length tried by the line search
  double regularization = 0.0;   // diagonal shift retried when the Hessian is singular;
                                 // 0 means 1e-12 * trace / k

  void validate() const;
};

enum class SolveStatus { Converged, MaxItersExceeded, StepTooSmall };
const char* to_string(SolveStatus status) noexcept;

struct IterationRecord {
  int iter = 0;
  double residual_inf = 0.0;
  double step_alpha = 0.0;  // step that produced this iterate (0 for the start)
  double min_cell_measure = 0.0;
  double energy = 0.0;
  double total_measure = 0.0;
};

struct SolveResult {
  std::vector<double> heights;  // normalized to sum zero for transport problems
  PowerDiagram diagram;
  MeasureVector measures;
  std::vector<double> targets;
  double mass = 0.0;  // scale used by the stopping rule
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<IterationRecord> log;
  std::vector<std::string> diagnostics;
  SolveStatus status = SolveStatus::MaxItersExceeded;
  bool converged = false;

  double residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// Cell measures of the free sites at one height vector.
struct MeasureState {
  std::vector<double> heights;
  PowerDiagram diagram;
  std::vector<double> measures;
  double total_measure = 0.0;
  double energy = 0.0;
};

/// The measure map h -> w(h) being inverted. gauge marks the transport case,
/// where the Jacobian has the constant vector as kernel.
struct MeasureModel {
  std::function<MeasureState(const std::vector<double>&)> evaluate;
  std::function<SparseMatrix(const MeasureState&)> jacobian;
  bool gauge = true;
};

struct NewtonStep {
  Eigen::VectorXd direction;
  bool fallback = false;  // Hessian was singular; direction is -gradient
};

/// Solves hessian * d = -gradient. With gauge, the last coordinate is pinned
/// (the leading principal minor is SPD for a connected diagram) and d is then
/// projected onto sum(d) = 0, which leaves hessian * d unchanged. If the
/// Cholesky factorization fails the diagonal is shifted by regularization
/// (or 1e-12 * trace / k) and retried once before falling back to -gradient.
NewtonStep newton_step(const SparseMatrix& hessian, const Eigen::VectorXd& gradient, bool gauge,
                       double regularization = 0.0);

struct LineSearchResult {
  double alpha = 0.0;
  bool accepted = false;
  MeasureState state;
};

/// Backtracks alpha = 1, 1/2, 1/4, ... down to min_step. A step is accepted
/// when every cell keeps measure >= min(min_i w_i(h), min_i A_i) / 2 and the
/// sup-norm residual strictly decreases.
LineSearchResult line_search(const MeasureModel& model, const MeasureState& current, const Eigen::VectorXd& direction,
                             std::span<const double> targets, double min_step);

double residual_inf(std::span<const double> measures, std::span<const double> targets);

/// Damped Newton on w(h) = A starting from a point with all cells nonempty.
SolveResult run_damped_newton(const MeasureModel& model, std::vector<double> start, std::span<const double> targets,
                              double mass, const SolverConfig& config);

/// Finds heights whose cells carry the target masses. Targets must be
/// positive and sum to the domain mass (to 1e-10 relative; they are then
/// rescaled exactly). initial_heights, when given, must have every cell
/// nonempty; otherwise feasible_heights() supplies the start.
SolveResult solve_ot(std::span<const Point2> points, const Polygon& domain, const Density& sigma,
                     std::span<const double> targets, const SolverConfig& config = {},
                     std::span<const double> initial_heights = {});

/// CSV rows: iter,residual_inf,step_alpha,min_cell_measure,energy_value
void write_convergence_csv(std::ostream& out, std::span<const IterationRecord> log);

}  // namespace alexot
