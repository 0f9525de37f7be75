#include "alexot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "alexot/error.hpp"

namespace alexot {

namespace {

constexpr int kDenseBelow = 64;

// Cholesky solve of an SPD system; nullopt when the factorization fails.
std::optional<Eigen::VectorXd> spd_solve(const SparseMatrix& a, const Eigen::VectorXd& b) {
  if (a.rows() == 0) return Eigen::VectorXd();
  Eigen::VectorXd x;
  if (a.rows() < kDenseBelow) {
    const Eigen::MatrixXd dense(a);
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success) return std::nullopt;
    x = llt.solve(b);
  } else {
    Eigen::SimplicialLLT<SparseMatrix> llt(a);
    if (llt.info() != Eigen::Success) return std::nullopt;
    x = llt.solve(b);
  }
  if (!x.allFinite()) return std::nullopt;
  return x;
}

SparseMatrix leading_minor(const SparseMatrix& a, Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> t;
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      if (it.row() < n && it.col() < n) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix with_diagonal_shift(SparseMatrix a, double shift) {
  if (shift == 0.0) return a;
  SparseMatrix id(a.rows(), a.cols());
  id.setIdentity();
  return a + shift * id;
}

void project_balanced(Eigen::VectorXd& d) {
  if (d.size() > 0) d.array() -= d.mean();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "solver tol must be positive");
  if (max_iters < 1) throw Error(ErrorCode::InvalidInput, "solver max_iters must be >= 1");
  if (!(min_step > 0.0) || min_step > 1.0) throw Error(ErrorCode::InvalidInput, "solver min_step must lie in (0, 1]");
  if (!(regularization >= 0.0)) throw Error(ErrorCode::InvalidInput, "solver regularization must be >= 0");
}

const char* to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxItersExceeded: return "MaxItersExceeded";
    case SolveStatus::StepTooSmall: return "StepTooSmall";
  }
  return "Unknown";
}

double residual_inf(std::span<const double> measures, std::span<const double> targets) {
  double r = 0.0;
  for (std::size_t i = 0; i < measures.size(); ++i) r = std::max(r, std::abs(measures[i] - targets[i]));
  return r;
}

NewtonStep newton_step(const SparseMatrix& hessian, const Eigen::VectorXd& gradient, bool gauge, double regularization) {
  const Eigen::Index k = gradient.size();
  NewtonStep step;
  step.direction = Eigen::VectorXd::Zero(k);
  if (k == 0 || gradient.isZero(0.0)) return step;
  if (gauge && k == 1) return step;

  const Eigen::Index n = gauge ? k - 1 : k;
  const SparseMatrix system = gauge ? leading_minor(hessian, n) : hessian;
  const Eigen::VectorXd rhs = -gradient.head(n);

  auto attempt = [&](double shift) -> bool {
    auto x = spd_solve(with_diagonal_shift(system, shift), rhs);
    if (!x) return false;
    step.direction.head(n) = *x;
    if (gauge) {
      step.direction[k - 1] = 0.0;
      project_balanced(step.direction);
    }
    return true;
  };

  if (attempt(0.0)) return step;
  const double trace = Eigen::MatrixXd(system).trace();
  const double shift = regularization > 0.0 ? regularization : 1e-12 * trace / static_cast<double>(n);
  if (shift > 0.0 && attempt(shift)) return step;

  step.fallback = true;
  step.direction = -gradient;
  if (gauge) project_balanced(step.direction);
  return step;
}

LineSearchResult line_search(const MeasureModel& model, const MeasureState& current, const Eigen::VectorXd& direction,
                             std::span<const double> targets, double min_step) {
  const double min_w = *std::min_element(current.measures.begin(), current.measures.end());
  const double min_a = *std::min_element(targets.begin(), targets.end());
  const double floor = 0.5 * std::min(min_w, min_a);
  const double r0 = residual_inf(current.measures, targets);

  std::vector<double> trial(current.heights.size());
  for (double alpha = 1.0; alpha >= min_step; alpha *= 0.5) {
    for (std::size_t i = 0; i < trial.size(); ++i)
      trial[i] = current.heights[i] + alpha * direction[static_cast<Eigen::Index>(i)];
    MeasureState s = model.evaluate(trial);
    const double min_trial = *std::min_element(s.measures.begin(), s.measures.end());
    if (min_trial >= floor && residual_inf(s.measures, targets) < r0) return {alpha, true, std::move(s)};
  }
  return {0.0, false, current};
}

SolveResult run_damped_newton(const MeasureModel& model, std::vector<double> start, std::span<const double> targets,
                              double mass, const SolverConfig& config) {
  config.validate();
  SolveResult result;
  result.targets.assign(targets.begin(), targets.end());
  result.mass = mass;

  MeasureState state = model.evaluate(start);
  if (*std::min_element(state.measures.begin(), state.measures.end()) <= 0.0)
    throw Error(ErrorCode::FeasibilityFailed, "starting heights leave a cell empty");

  double last_alpha = 0.0;
  for (int iter = 0;; ++iter) {
    const double r = residual_inf(state.measures, targets);
    result.residual_history.push_back(r);
    result.log.push_back({iter, r, last_alpha, *std::min_element(state.measures.begin(), state.measures.end()),
                          state.energy, state.total_measure});
    if (r <= config.tol * mass) {
      result.status = SolveStatus::Converged;
      break;
    }
    if (iter == config.max_iters) {
      result.status = SolveStatus::MaxItersExceeded;
      break;
    }
    if (model.gauge && !state.diagram.adjacency_connected())
      result.diagnostics.push_back("iteration " + std::to_string(iter) + ": cell adjacency graph is disconnected");

    Eigen::VectorXd gradient(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i)
      gradient[static_cast<Eigen::Index>(i)] = state.measures[i] - targets[i];
    const NewtonStep step = newton_step(model.jacobian(state), gradient, model.gauge, config.regularization);
    if (step.fallback)
      result.diagnostics.push_back("iteration " + std::to_string(iter) +
                                   ": SingularHessian, falling back to the gradient direction");

    LineSearchResult ls = line_search(model, state, step.direction, targets, config.min_step);
    if (!ls.accepted) {
      result.status = SolveStatus::StepTooSmall;
      break;
    }
    state = std::move(ls.state);
    last_alpha = ls.alpha;
    ++result.iterations;
  }

  result.converged = result.status == SolveStatus::Converged;
  result.heights = std::move(state.heights);
  result.diagram = std::move(state.diagram);
  result.measures.masses = std::move(state.measures);
  result.measures.total = state.total_measure;
  return result;
}

SolveResult solve_ot(std::span<const Point2> points, const Polygon& domain, const Density& sigma,
                     std::span<const double> targets, const SolverConfig& config,
                     std::span<const double> initial_heights) {
  config.validate();
  if (points.empty()) throw Error(ErrorCode::InvalidInput, "no sites");
  if (targets.size() != points.size()) throw Error(ErrorCode::InvalidInput, "one target per site is required");
  if (!is_convex_ccw(domain) || domain.size() < 3) throw Error(ErrorCode::InvalidInput, "domain must be a convex counterclockwise polygon");
  sigma.validate_on(domain);
  check_distinct(points, geometric_tolerance(domain));

  const double mass = total_mass(domain, sigma);
  const std::vector<double> balanced = balance_targets(targets, mass);

  const std::vector<Point2> pts(points.begin(), points.end());
  MeasureModel model;
  model.gauge = true;
  model.evaluate = [&](const std::vector<double>& h) {
    MeasureState s;
    s.heights = h;
    const SiteSet sites{pts, h};
    s.diagram = build_diagram(sites, domain);
    MeasureVector w = cell_measures(s.diagram, sigma);
    s.measures = std::move(w.masses);
    s.total_measure = w.total;
    double target_term = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) target_term += h[i] * balanced[i];
    s.energy = linear_part_integral(s.diagram, sites, sigma) - target_term;
    return s;
  };
  model.jacobian = [&](const MeasureState& s) {
    return measure_jacobian(s.diagram, SiteSet{pts, s.heights}, sigma, pts.size());
  };

  std::vector<double> start;
  if (!initial_heights.empty()) {
    if (initial_heights.size() != points.size()) throw Error(ErrorCode::InvalidInput, "one initial height per site is required");
    start.assign(initial_heights.begin(), initial_heights.end());
  } else {
    start = feasible_heights(points, domain);
  }

  SolveResult result = run_damped_newton(model, std::move(start), balanced, mass, config);

  // Fix the gauge: shifting all heights by a constant changes nothing observable.
  const double mean = std::accumulate(result.heights.begin(), result.heights.end(), 0.0) /
                      static_cast<double>(result.heights.size());
  for (double& h : result.heights) h -= mean;
  MeasureState normalized = model.evaluate(result.heights);
  result.diagram = std::move(normalized.diagram);
  result.measures.masses = std::move(normalized.measures);
  result.measures.total = normalized.total_measure;
  return result;
}

void write_convergence_csv(std::ostream& out, std::span<const IterationRecord> log) {
  out << "iter,residual_inf,step_alpha,min_cell_measure,energy_value\n";
  char buf[256];
  for (const IterationRecord& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.residual_inf, r.step_alpha,
                  r.min_cell_measure, r.energy);
    out << buf;
  }
}

}  // namespace alexot
