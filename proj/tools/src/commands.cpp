#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include "alexot/cli/cli.hpp"
#include "alexot/energy.hpp"
#include "alexot/error.hpp"
#include "alexot/oracle.hpp"

namespace alexot::cli {

using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  f << text;
}

std::string parent_dir(const std::string& path) {
  const std::filesystem::path p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool skipped = false;
  json details = json::object();
};

json check_json(const Check& c) {
  json j{{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}};
  if (c.skipped) j["skipped"] = true;
  if (!c.details.empty()) j["details"] = c.details;
  return j;
}

std::vector<Check> verify_transport(const LoadedSolution& s, const VerifyOptions& o) {
  const Problem& p = s.problem;
  const SiteSet sites{p.points, s.heights};
  const PowerDiagram diagram = build_diagram(sites, p.omega);
  const MeasureVector w = cell_measures(diagram, p.sigma);
  const double mass = total_mass(p.omega, p.sigma);
  std::vector<Check> checks;

  Check r{"residual", residual_inf(w.masses, p.targets), p.config.tol * mass};
  r.pass = r.value <= r.bound;
  r.details = {{"stored", s.residual}};
  checks.push_back(r);

  Check m{"mass_conservation", std::abs(w.total - mass) / mass, 1e-10};
  m.pass = m.value <= m.bound;
  checks.push_back(m);

  if (o.fd) {
    const auto E = [&](const Eigen::VectorXd& h) {
      return energy_value(SiteSet{p.points, to_std(h)}, p.omega, p.sigma, p.targets);
    };
    const auto G = [&](const Eigen::VectorXd& h) {
      return Eigen::VectorXd(energy_gradient(SiteSet{p.points, to_std(h)}, p.omega, p.sigma, p.targets));
    };
    const EnergyReport rep = evaluate_energy(sites, p.omega, p.sigma, p.targets);
    const Eigen::VectorXd h = to_eigen(s.heights);
    // near a solution the gradient vanishes; measure errors against the cell masses instead
    const double scale = *std::max_element(p.targets.begin(), p.targets.end());
    const oracle::FdReport g = oracle::fd_check_gradient(E, h, rep.gradient, 1e-5, scale);
    Check cg{"fd_gradient", g.max_rel_error, 1e-5};
    cg.pass = cg.value < cg.bound;
    checks.push_back(cg);
    const oracle::FdReport hs = oracle::fd_check_jacobian(G, h, Eigen::MatrixXd(rep.hessian), 1e-5);
    Check ch{"fd_hessian", hs.max_rel_error, 1e-4};
    ch.pass = ch.value < ch.bound;
    ch.details = {{"entries_checked", hs.checked}};
    checks.push_back(ch);
  }
  if (o.mc) {
    const oracle::McEstimate e = oracle::mc_cell_measures(sites, p.omega, p.sigma, o.samples, o.seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double diff = std::abs(e.masses[i] - w.masses[i]);
      worst = std::max(worst, e.std_errors[i] > 0.0 ? diff / e.std_errors[i] : (diff > 0.0 ? INFINITY : 0.0));
    }
    Check c{"monte_carlo", worst, 4.0};
    c.pass = c.value <= c.bound;
    c.details = {{"samples", e.samples}, {"unit", "standard errors"}};
    checks.push_back(c);
  }
  if (o.lp) {
    const double total = std::accumulate(p.targets.begin(), p.targets.end(), 0.0);
    const oracle::GridDiscretization g = oracle::discretize(p.omega, p.sigma, o.grid, total);
    const double lp = oracle::lp_transport_cost(g, p.points, p.targets).cost;
    const double sd = quadratic_cost(diagram, sites, p.sigma);
    const double induced = oracle::induced_plan_cost(g, diagram, p.points, p.sigma);
    Check c{"lp_gap", std::abs(lp - sd) / sd, 0.05};
    const bool below = lp <= induced + 1e-12 * std::abs(induced);
    c.pass = c.value < c.bound && below;
    c.details = {{"grid", o.grid}, {"lp_cost", lp}, {"semidiscrete_cost", sd}, {"induced_plan_cost", induced},
                 {"lp_below_induced", below}};
    checks.push_back(c);
  }
  if (o.partition) {
    const oracle::PartitionCheck pc =
        oracle::random_partition_cost_check(sites, diagram, p.sigma, p.targets, o.trials, o.seed);
    Check c{"partition", pc.min_gap, 0.0};
    c.pass = pc.passed;
    c.skipped = pc.skipped;
    c.details = {{"trials", pc.trials}, {"cost", pc.cost}};
    checks.push_back(c);
  }
  return checks;
}

std::vector<Check> verify_dmae(const LoadedSolution& s, const VerifyOptions& o) {
  const DmaeProblem& d = s.problem.dmae;
  const SiteSet ext = extended_sites(d, s.heights);
  const PlConvexFunction w = legendre_dual(ext.points, ext.heights);
  const double total = std::accumulate(d.targets.begin(), d.targets.end(), 0.0);
  std::vector<Check> checks;

  Check r{"residual", 0.0, 1e-8 * total};
  for (std::size_t j = 0; j < d.interior.size(); ++j)
    r.value = std::max(r.value, std::abs(discrete_hessian_det(w, d.interior[j]) - d.targets[j]));
  r.pass = r.value <= r.bound;
  r.details = {{"stored", s.residual}};
  checks.push_back(r);

  Check b{"boundary_values", 0.0, 1e-12};
  for (std::size_t i = 0; i < d.boundary.size(); ++i) {
    b.value = std::max(b.value, std::abs(w(d.boundary[i]) - d.boundary_values[i]));
    b.bound = std::max(b.bound, 1e-12 * std::abs(d.boundary_values[i]));
  }
  b.pass = b.value <= b.bound;
  checks.push_back(b);

  Check v{"dual_values", 0.0, 1e-10};
  for (std::size_t j = 0; j < d.interior.size(); ++j)
    v.value = std::max(v.value, std::abs(w(d.interior[j]) + s.heights[j]));
  v.pass = v.value <= v.bound;
  checks.push_back(v);

  for (const auto& [flag, name] : {std::pair{o.fd, "fd_gradient"}, std::pair{o.mc, "monte_carlo"},
                                   std::pair{o.lp, "lp_gap"}, std::pair{o.partition, "partition"}}) {
    if (!flag) continue;
    Check c{name};
    c.skipped = true;
    c.details = {{"reason", "transport solutions only"}};
    checks.push_back(c);
  }
  return checks;
}

}  // namespace

unsigned resolve_threads(unsigned flag_value) {
  if (const char* env = std::getenv("ALEXOT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, flag_value);
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Problem p = parse_problem(read_json_file(o.input), parent_dir(o.input));
    if (o.tol) p.config.tol = *o.tol;
    if (o.max_iters) p.config.max_iters = *o.max_iters;
    p.config.validate();

    json sol;
    const SolveResult* result = nullptr;
    SolveResult ot;
    DmaeSolution dm;
    if (p.kind == ProblemKind::Transport) {
      ot = solve_ot(p.points, p.omega, p.sigma, p.targets, p.config);
      sol = transport_solution_json(p, ot, SiteSet{p.points, ot.heights});
      result = &ot;
    } else {
      dm = solve_dmae(p.dmae, p.config);
      sol = dmae_solution_json(p, dm);
      result = &dm.solve;
    }
    write_text(o.output, sol.dump(2) + "\n", out);
    if (!o.csv.empty()) {
      std::ofstream csv(o.csv);
      if (!csv) throw Error(ErrorCode::InvalidInput, "cannot write " + o.csv);
      write_convergence_csv(csv, result->log);
    }
    for (const std::string& d : result->diagnostics) err << "note: " << d << '\n';
    err << to_string(result->status) << " after " << result->iterations << " iterations, residual "
        << sol.at("residual").get<double>() << '\n';
    return result->converged ? kOk : kNotConverged;
  });
}

int cmd_render(const RenderOptions& o, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedSolution s = parse_solution(read_json_file(o.input));
    write_text(o.output, render_svg(s, o.dual, o.arrows), std::cout);
    return kOk;
  });
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedSolution s = parse_solution(read_json_file(o.input));
    const std::vector<Check> checks =
        s.problem.kind == ProblemKind::Transport ? verify_transport(s, o) : verify_dmae(s, o);
    bool all = true;
    json list = json::array();
    for (const Check& c : checks) {
      if (!c.skipped) all = all && c.pass;
      list.push_back(check_json(c));
      err << (c.skipped ? "SKIP " : c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
          << " bound=" << c.bound << '\n';
    }
    const json report{{"solution", o.input}, {"passed", all}, {"checks", list}};
    write_text(o.report, report.dump(2) + "\n", out);
    return all ? kOk : kCheckFailed;
  });
}

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    json doc;
    if (o.kind == "ot") {
      if (o.k < 1) throw Error(ErrorCode::InvalidInput, "k must be positive");
      json sigma = json{{"type", "uniform"}, {"c", 1.0}};
      if (o.sigma == "affine")
        sigma = {{"type", "affine"}, {"a", 0.5}, {"b", -0.3}, {"c", 1.0}};
      else if (o.sigma != "uniform")
        throw Error(ErrorCode::InvalidInput, "gen supports uniform or affine sigma");
      const Polygon omega = unit_square();
      const double mass = total_mass(omega, parse_density(sigma, "."));
      std::vector<Point2> pts;
      while (pts.size() < static_cast<std::size_t>(o.k)) {
        const Point2 c{-0.2 + 1.4 * u(rng), -0.2 + 1.4 * u(rng)};
        bool far = true;
        for (Point2 q : pts) far = far && distance(c, q) > 0.01;
        if (far) pts.push_back(c);
      }
      std::vector<double> a(pts.size());
      for (double& x : a) x = 0.05 + u(rng);
      const double sum = std::accumulate(a.begin(), a.end(), 0.0);
      json sites = json::array();
      for (std::size_t i = 0; i < pts.size(); ++i) sites.push_back({pts[i].x, pts[i].y, a[i] * mass / sum});
      doc = {{"kind", "ot"}, {"seed", o.seed}, {"omega", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, {"sigma", sigma},
             {"sites", sites}};
    } else if (o.kind == "dmae") {
      if (o.m < 3 || o.k < 1) throw Error(ErrorCode::InvalidInput, "dmae needs m >= 3 and k >= 1");
      json boundary = json::array(), interior = json::array();
      std::vector<Point2> ring;
      const double pi = std::acos(-1.0);
      for (int i = 0; i < o.m; ++i) {
        const double t = 2.0 * pi * (i + 0.3 * (u(rng) - 0.5)) / o.m;
        const Point2 v{0.5 + 0.5 * std::cos(t), 0.5 + 0.5 * std::sin(t)};
        ring.push_back(v);
        boundary.push_back({v.x, v.y, squared_norm(v - Point2{0.5, 0.5})});
      }
      const Polygon hull = convex_hull(ring);
      std::vector<Point2> pts;
      while (pts.size() < static_cast<std::size_t>(o.k)) {
        const Point2 c{0.5 + 0.35 * (2.0 * u(rng) - 1.0), 0.5 + 0.35 * (2.0 * u(rng) - 1.0)};
        if (!contains(hull, c) || boundary_distance(hull, c) < 0.05) continue;
        bool far = true;
        for (Point2 q : pts) far = far && distance(c, q) > 0.02;
        if (far) pts.push_back(c);
      }
      for (Point2 c : pts) interior.push_back({c.x, c.y, 0.05 + u(rng)});
      doc = {{"kind", "dmae"}, {"seed", o.seed}, {"boundary", boundary}, {"interior", interior}};
    } else {
      throw Error(ErrorCode::InvalidInput, "unknown kind '" + o.kind + "'");
    }
    write_text(o.output, doc.dump(2) + "\n", out);
    return kOk;
  });
}

}  // namespace alexot::cli
