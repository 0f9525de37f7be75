#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "alexot/cli/cli.hpp"
#include "alexot/energy.hpp"
#include "alexot/error.hpp"

namespace alexot::cli {

using nlohmann::json;

namespace {

Point2 read_point(const json& j) {
  if (!j.is_array() || j.size() < 2) throw Error(ErrorCode::InvalidInput, "expected [x, y, ...], got " + j.dump());
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

double read_third(const json& j, const char* what) {
  if (j.size() < 3) throw Error(ErrorCode::InvalidInput, std::string("missing ") + what + " in " + j.dump());
  return j.at(2).get<double>();
}

Polygon read_omega(const json& doc) {
  if (!doc.contains("omega")) return unit_square();
  Polygon p;
  for (const json& v : doc.at("omega")) p.vertices.push_back(read_point(v));
  if (p.size() < 3) throw Error(ErrorCode::InvalidInput, "omega needs at least 3 vertices");
  if (signed_area(p) < 0.0) std::reverse(p.vertices.begin(), p.vertices.end());
  if (!is_convex_ccw(p)) throw Error(ErrorCode::InvalidInput, "omega must be a convex polygon");
  return p;
}

json points_json(std::span<const Point2> pts) {
  json a = json::array();
  for (Point2 p : pts) a.push_back({p.x, p.y});
  return a;
}

json polygon_json(const Polygon& p) { return points_json(p.vertices); }

SolverConfig read_solver(const json& doc) {
  SolverConfig c;
  if (!doc.contains("solver")) return c;
  const json& s = doc.at("solver");
  c.tol = s.value("tol", c.tol);
  c.max_iters = s.value("max_iters", c.max_iters);
  c.min_step = s.value("min_step", c.min_step);
  c.regularization = s.value("regularization", c.regularization);
  c.validate();
  return c;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
}

Density parse_density(const json& spec, const std::string& base_dir, json* inlined) {
  if (spec.is_null() || (spec.is_string() && spec.get<std::string>() == "uniform")) {
    if (inlined) *inlined = {{"type", "uniform"}, {"c", 1.0}};
    return Density::uniform();
  }
  const std::string type = spec.at("type").get<std::string>();
  if (type == "uniform") {
    const double c = spec.value("c", 1.0);
    if (inlined) *inlined = {{"type", "uniform"}, {"c", c}};
    return Density::uniform(c);
  }
  if (type == "affine") {
    const double a = spec.value("a", 0.0), b = spec.value("b", 0.0), c = spec.value("c", 1.0);
    if (inlined) *inlined = {{"type", "affine"}, {"a", a}, {"b", b}, {"c", c}};
    return Density::affine(a, b, c);
  }
  if (type == "grid") {
    GridDensity g;
    if (spec.contains("file")) {
      std::filesystem::path p = spec.at("file").get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      g = load_grid_density(p.string());
    } else {
      g = parse_grid_density(spec.dump());
    }
    if (inlined) {
      *inlined = json::parse(grid_density_to_json(g));
      (*inlined)["type"] = "grid";
    }
    return Density(std::move(g));
  }
  throw Error(ErrorCode::InvalidInput, "unknown density type '" + type + "'");
}

json solver_to_json(const SolverConfig& c) {
  return {{"tol", c.tol}, {"max_iters", c.max_iters}, {"min_step", c.min_step}, {"regularization", c.regularization}};
}

Problem parse_problem(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "problem file must hold a JSON object");
  Problem p;
  const std::string kind = doc.value("kind", "ot");
  p.config = read_solver(doc);
  if (kind == "ot") {
    p.kind = ProblemKind::Transport;
    p.omega = read_omega(doc);
    p.sigma = parse_density(doc.contains("sigma") ? doc.at("sigma") : json(), base_dir, &p.sigma_spec);
    p.sigma.validate_on(p.omega);
    for (const json& s : doc.at("sites")) {
      p.points.push_back(read_point(s));
      p.targets.push_back(read_third(s, "target"));
    }
    if (p.points.empty()) throw Error(ErrorCode::InvalidInput, "no sites");
    p.targets = balance_targets(p.targets, total_mass(p.omega, p.sigma), 1e-6);
  } else if (kind == "dmae") {
    p.kind = ProblemKind::Dmae;
    for (const json& v : doc.at("boundary")) {
      p.dmae.boundary.push_back(read_point(v));
      p.dmae.boundary_values.push_back(read_third(v, "boundary value"));
    }
    for (const json& s : doc.at("interior")) {
      p.dmae.interior.push_back(read_point(s));
      p.dmae.targets.push_back(read_third(s, "target"));
    }
    p.dmae.validate();
    p.omega = p.dmae.domain();
    p.points = p.dmae.interior;
    p.targets = p.dmae.targets;
    p.sigma_spec = {{"type", "uniform"}, {"c", 1.0}};
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown problem kind '" + kind + "'");
  }
  return p;
}

json transport_solution_json(const Problem& problem, const SolveResult& result, const SiteSet& sites) {
  const PowerDiagram diagram = build_diagram(sites, problem.omega);
  const MeasureVector w = cell_measures(diagram, problem.sigma);
  json sites_j = json::array();
  for (std::size_t i = 0; i < sites.size(); ++i) sites_j.push_back({sites.points[i].x, sites.points[i].y, problem.targets[i]});
  json cells = json::array();
  for (const Polygon& c : diagram.cells) cells.push_back(polygon_json(c));
  json edges = json::array();
  for (const DiagramEdge& e : diagram.edges) edges.push_back({e.i, e.j});
  return {
      {"kind", "ot"},
      {"omega", polygon_json(problem.omega)},
      {"sigma", problem.sigma_spec},
      {"sites", sites_j},
      {"heights", sites.heights},
      {"measures", w.masses},
      {"targets", problem.targets},
      {"mass", total_mass(problem.omega, problem.sigma)},
      {"residual", residual_inf(w.masses, problem.targets)},
      {"iterations", result.iterations},
      {"converged", result.converged},
      {"status", to_string(result.status)},
      {"cost", quadratic_cost(diagram, sites, problem.sigma)},
      {"solver", solver_to_json(problem.config)},
      {"cells", cells},
      {"edges", edges},
  };
}

namespace {

std::vector<double> dual_determinants(const DmaeProblem& problem, const PlConvexFunction& dual) {
  std::vector<double> det;
  for (Point2 p : problem.interior) det.push_back(discrete_hessian_det(dual, p));
  return det;
}

}  // namespace

json dmae_solution_json(const Problem& problem, const DmaeSolution& sol) {
  const DmaeProblem& d = problem.dmae;
  json boundary = json::array(), interior = json::array(), dual_vertices = json::array();
  for (std::size_t i = 0; i < d.boundary.size(); ++i) boundary.push_back({d.boundary[i].x, d.boundary[i].y, d.boundary_values[i]});
  for (std::size_t j = 0; j < d.interior.size(); ++j) interior.push_back({d.interior[j].x, d.interior[j].y, d.targets[j]});
  for (std::size_t i = 0; i < sol.dual.points.size(); ++i)
    dual_vertices.push_back({sol.dual.points[i].x, sol.dual.points[i].y, sol.dual.values[i]});
  const std::vector<double> det = dual_determinants(d, sol.dual);
  return {
      {"kind", "dmae"},
      {"boundary", boundary},
      {"interior", interior},
      {"heights", sol.heights},
      {"targets", d.targets},
      {"measures", std::vector<double>(sol.solve.measures.masses.begin(),
                                       sol.solve.measures.masses.begin() + static_cast<long>(d.interior.size()))},
      {"determinants", det},
      {"residual", residual_inf(det, d.targets)},
      {"iterations", sol.solve.iterations},
      {"converged", sol.solve.converged},
      {"status", to_string(sol.solve.status)},
      {"solver", solver_to_json(problem.config)},
      {"dual_vertices", dual_vertices},
      {"cells", sol.dual.cells},
  };
}

LoadedSolution parse_solution(const json& doc) {
  if (!doc.is_object() || !doc.contains("heights"))
    throw Error(ErrorCode::InvalidInput, "not a solution file (no heights)");
  LoadedSolution s;
  s.problem = parse_problem(doc, ".");
  s.heights = doc.at("heights").get<std::vector<double>>();
  s.residual = doc.value("residual", 0.0);
  if (s.heights.size() != s.problem.points.size())
    throw Error(ErrorCode::InvalidInput, "heights and sites differ in length");
  return s;
}

double reevaluate_residual(const LoadedSolution& s) {
  const Problem& p = s.problem;
  if (p.kind == ProblemKind::Transport) {
    const PowerDiagram diagram = build_diagram(SiteSet{p.points, s.heights}, p.omega);
    return residual_inf(cell_measures(diagram, p.sigma).masses, p.targets);
  }
  const SiteSet ext = extended_sites(p.dmae, s.heights);
  return residual_inf(dual_determinants(p.dmae, legendre_dual(ext.points, ext.heights)), p.targets);
}

}  // namespace alexot::cli
