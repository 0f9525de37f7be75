// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "alexot/dmae.hpp"
#include "alexot/energy.hpp"
#include "alexot/error.hpp"
#include "alexot/oracle.hpp"
#include "alexot/solver.hpp"
#include "support.hpp"

namespace {

using namespace alexot;
using Clock = std::chrono::steady_clock;

// Tolerances, fixed here once.
constexpr double kGradRel = 1e-5;
constexpr double kHessRel = 1e-4;
constexpr double kHessFloor = 1e-6;
constexpr double kSymmetry = 1e-12;
constexpr double kRowSum = 1e-10;
constexpr double kResidual = 1e-10;
constexpr double kUniqueness = 1e-8;
constexpr double kSpectral = 1e-12;
constexpr double kLpGap = 0.05;
constexpr double kMassRel = 1e-10;
constexpr double kDmaeDet = 1e-8;
constexpr double kDualArea = 1e-10;
constexpr double kNearAffine = 1e-4;
constexpr double kPlaneEval = 1e-12;
constexpr double kFdStep = 1e-5;
constexpr double kCrit1Seconds = 10.0;
constexpr double kCrit3Seconds = 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }
std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Density sigma_for(std::size_t i) { return i % 2 == 0 ? Density::uniform() : Density::affine(0.5, -0.3, 1.2); }

bool all_nonempty(const SiteSet& s, const Polygon& domain) {
  const PowerDiagram d = build_diagram(s, domain);
  for (const Polygon& c : d.cells)
    if (area(c) <= 0.0) return false;
  return true;
}

// Feasible heights pushed off the Voronoi start, shrinking the push until every cell survives.
std::vector<double> perturbed_start(const testing::OtInstance& inst, std::uint64_t seed, double size) {
  const std::vector<double> base = feasible_heights(inst.points, inst.domain);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> noise(base.size());
  for (double& x : noise) x = n(rng);
  for (double t = size; t > 1e-9; t *= 0.5) {
    std::vector<double> h = base;
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += t * noise[i];
    if (all_nonempty(SiteSet{inst.points, h}, inst.domain)) return h;
  }
  return base;
}

struct OtCase {
  testing::OtInstance inst;
  std::vector<double> heights;
};

std::vector<OtCase> calculus_instances() {
  std::vector<OtCase> out;
  const std::size_t ks[] = {3, 10, 30};
  for (std::size_t i = 0; i < 20; ++i) {
    OtCase c{testing::random_ot(ks[i % 3], 500 + i, sigma_for(i)), {}};
    c.heights = perturbed_start(c.inst, 900 + i, 0.02);
    out.push_back(std::move(c));
  }
  return out;
}

Outcome criterion_gradient(const std::vector<OtCase>& cases) {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const OtCase& c : cases) {
    const auto& in = c.inst;
    const auto E = [&](const Eigen::VectorXd& h) {
      return energy_value(SiteSet{in.points, to_std(h)}, in.domain, in.sigma, in.targets);
    };
    const Eigen::VectorXd g = energy_gradient(SiteSet{in.points, c.heights}, in.domain, in.sigma, in.targets);
    worst = std::max(worst, oracle::fd_check_gradient(E, to_eigen(c.heights), g, kFdStep).max_rel_error);
  }
  const double secs = seconds_since(t0);
  o.require(worst < kGradRel, fmt("gradient rel error %.3g >= %.0e", worst, kGradRel));
  o.require(secs < kCrit1Seconds, fmt("took %.2f s", secs));
  if (o.pass) o.detail = fmt("20 instances, max rel error %.2e, %.2f s", worst, secs);
  return o;
}

Outcome criterion_hessian(const std::vector<OtCase>& cases) {
  Outcome o;
  double fd = 0.0, sym = 0.0, rows = 0.0;
  for (const OtCase& c : cases) {
    const auto& in = c.inst;
    const Eigen::MatrixXd H(energy_hessian(SiteSet{in.points, c.heights}, in.domain, in.sigma));
    const auto G = [&](const Eigen::VectorXd& h) {
      return Eigen::VectorXd(energy_gradient(SiteSet{in.points, to_std(h)}, in.domain, in.sigma, in.targets));
    };
    fd = std::max(fd, oracle::fd_check_jacobian(G, to_eigen(c.heights), H, kFdStep, kHessFloor).max_rel_error);
    const double scale = H.cwiseAbs().maxCoeff();
    sym = std::max(sym, (H - H.transpose()).cwiseAbs().maxCoeff() / scale);
    rows = std::max(rows, (H * Eigen::VectorXd::Ones(H.rows())).cwiseAbs().maxCoeff() / scale);
  }
  o.require(fd < kHessRel, fmt("Hessian rel error %.3g", fd));
  o.require(sym <= kSymmetry, fmt("asymmetry %.3g", sym));
  o.require(rows <= kRowSum, fmt("row sum %.3g", rows));
  if (o.pass) o.detail = fmt("max rel error %.2e, asymmetry %.1e, row sums %.1e", fd, sym, rows);
  return o;
}

struct SolvedCase {
  testing::OtInstance inst;
  SolveResult result;
  SolveResult second;
};

std::vector<SolvedCase> solved_instances(double& seconds) {
  const std::size_t ks[] = {2, 5, 10, 20, 35, 50};
  std::vector<SolvedCase> out;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < 50; ++i) {
    SolvedCase c{testing::random_ot(ks[i % 6], 2000 + i, sigma_for(i)), {}, {}};
    const auto& in = c.inst;
    c.result = solve_ot(in.points, in.domain, in.sigma, in.targets);
    const std::vector<double> start = perturbed_start(in, 3000 + i, 0.05);
    c.second = solve_ot(in.points, in.domain, in.sigma, in.targets, {}, start);
    out.push_back(std::move(c));
  }
  seconds = seconds_since(t0);
  return out;
}

Outcome criterion_existence(const std::vector<SolvedCase>& cases, double seconds) {
  Outcome o;
  double residual = 0.0, spread = 0.0;
  int iters = 0;
  for (const SolvedCase& c : cases) {
    const double mass = total_mass(c.inst.domain, c.inst.sigma);
    o.require(c.result.converged && c.second.converged, "solver did not converge");
    residual = std::max(residual, std::max(c.result.residual(), c.second.residual()) / mass);
    for (std::size_t i = 0; i < c.result.heights.size(); ++i)
      spread = std::max(spread, std::abs(c.result.heights[i] - c.second.heights[i]));
    iters = std::max(iters, c.result.iterations);
  }
  o.require(residual <= kResidual, fmt("residual %.3g * mass", residual));
  o.require(spread <= kUniqueness, fmt("starts disagree by %.3g", spread));
  o.require(seconds < kCrit3Seconds, fmt("took %.2f s", seconds));
  if (o.pass)
    o.detail = fmt("50 instances, residual <= %.1e * mass, starts agree to %.1e, <= %d iterations, %.2f s", residual,
                   spread, iters, seconds);
  return o;
}

Outcome criterion_rigidity(const std::vector<SolvedCase>& cases) {
  Outcome o;
  double worst_ratio = std::numeric_limits<double>::infinity(), kernel = 0.0;
  for (const SolvedCase& c : cases) {
    const SiteSet s{c.inst.points, c.result.heights};
    const Eigen::MatrixXd H(energy_hessian(s, c.inst.domain, c.inst.sigma));
    const Eigen::Index k = H.rows();
    const double norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues()[k - 1];
    if (k > 1) {
      const Eigen::MatrixXd pinned = H.topLeftCorner(k - 1, k - 1);
      const double lmin =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(pinned, Eigen::EigenvaluesOnly).eigenvalues()[0];
      worst_ratio = std::min(worst_ratio, lmin / norm);
    }
    kernel = std::max(kernel, (H * Eigen::VectorXd::Ones(k)).cwiseAbs().maxCoeff() / norm);
  }
  o.require(worst_ratio > kSpectral, fmt("lambda_min / |H| = %.3g", worst_ratio));
  o.require(kernel <= kSpectral, fmt("|H 1| / |H| = %.3g", kernel));
  if (o.pass) o.detail = fmt("min lambda_min / |H| = %.2e, max |H 1| / |H| = %.1e", worst_ratio, kernel);
  return o;
}

Outcome criterion_transport_cost() {
  Outcome o;
  const std::size_t ks[] = {3, 5, 7, 9, 10};
  double worst_gap = 0.0;
  for (std::size_t f = 0; f < 5; ++f) {
    const auto in = testing::random_ot(ks[f], 4000 + f, sigma_for(f));
    const SolveResult sol = solve_ot(in.points, in.domain, in.sigma, in.targets);
    const double sd = quadratic_cost(sol.diagram, SiteSet{in.points, sol.heights}, in.sigma);
    const double total = std::accumulate(in.targets.begin(), in.targets.end(), 0.0);
    double last = std::numeric_limits<double>::infinity();
    for (int n : {32, 64, 128}) {
      const oracle::GridDiscretization g = oracle::discretize(in.domain, in.sigma, n, total);
      const double lp = oracle::lp_transport_cost(g, in.points, in.targets).cost;
      const double induced = oracle::induced_plan_cost(g, sol.diagram, in.points, in.sigma);
      const double gap = std::abs(lp - sd) / sd;
      o.require(lp <= induced + 1e-12 * induced, fmt("fixture %zu at %d: LP %.10g above induced %.10g", f, n, lp, induced));
      o.require(gap < last, fmt("fixture %zu: gap %.3g at %d does not shrink", f, gap, n));
      last = gap;
    }
    o.require(last < kLpGap, fmt("fixture %zu: gap %.3g at 128", f, last));
    worst_gap = std::max(worst_gap, last);
  }
  if (o.pass) o.detail = fmt("5 fixtures, monotone gaps, worst relative gap at 128^2 %.2e", worst_gap);
  return o;
}

Outcome criterion_mass(const std::vector<SolvedCase>& cases) {
  Outcome o;
  double worst = 0.0;
  std::size_t iterates = 0;
  for (const SolvedCase& c : cases) {
    const double mass = total_mass(c.inst.domain, c.inst.sigma);
    for (const SolveResult* r : {&c.result, &c.second})
      for (const IterationRecord& rec : r->log) {
        worst = std::max(worst, std::abs(rec.total_measure - mass) / mass);
        ++iterates;
      }
  }
  o.require(worst <= kMassRel, fmt("mass drift %.3g", worst));
  if (o.pass) o.detail = fmt("%zu iterates, max relative drift %.1e", iterates, worst);
  return o;
}

Outcome criterion_dmae() {
  Outcome o;
  double det_err = 0.0, area_err = 0.0, dual_err = 0.0, boundary_err = 0.0;
  for (std::uint64_t f = 0; f < 20; ++f) {
    const DmaeProblem p = testing::random_dmae(4 + f % 5, 1 + f % 10, 6000 + f);
    const std::size_t k = p.interior.size(), m = p.boundary.size();
    const DmaeSolution s = solve_dmae(p);
    o.require(s.solve.converged, fmt("fixture %llu did not converge", static_cast<unsigned long long>(f)));
    const double total = std::accumulate(p.targets.begin(), p.targets.end(), 0.0);
    // lifted boundary values are g bit for bit; evaluating the planes rounds
    for (std::size_t i = 0; i < m; ++i) {
      o.require(s.dual.values[k + i] == p.boundary_values[i],
                fmt("fixture %llu: lifted w(v_%zu) != g", static_cast<unsigned long long>(f), i));
      boundary_err = std::max(boundary_err, std::abs(s.dual(p.boundary[i]) - p.boundary_values[i]));
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double det = discrete_hessian_det(s.dual, p.interior[j]);
      dual_err = std::max(dual_err, std::abs(s.dual(p.interior[j]) + s.heights[j]));
      det_err = std::max(det_err, std::abs(det - p.targets[j]) / total);
      area_err = std::max(area_err, std::abs(det - area(s.diagram.cells[j])));
    }
    std::mt19937_64 rng(f);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0, violations = 0;
    while (tested < 1000) {
      const Point2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
      if (!contains(s.dual.domain, x) || !contains(s.dual.domain, y)) continue;
      ++tested;
      violations += s.dual(0.5 * (x + y)) > 0.5 * (s.dual(x) + s.dual(y)) + 1e-12;
    }
    o.require(violations == 0, fmt("fixture %llu: %d midpoint violations", static_cast<unsigned long long>(f), violations));
  }
  o.require(boundary_err <= kPlaneEval, fmt("w(v) - g = %.3g", boundary_err));
  o.require(dual_err <= kPlaneEval, fmt("w(p) + h = %.3g", dual_err));
  o.require(det_err <= kDmaeDet, fmt("det error %.3g * sum A", det_err));
  o.require(area_err <= kDualArea, fmt("det vs cell area %.3g", area_err));
  if (o.pass)
    o.detail = fmt("20 fixtures, det error %.1e * sum A, det vs area %.1e, w(v) - g %.1e, w(p) + h %.1e", det_err,
                   area_err, boundary_err, dual_err);
  return o;
}

std::size_t argmax(const SiteSet& s, Point2 x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s.affine(i, x) > s.affine(best, x)) best = i;
  return best;
}

Outcome criterion_diagram(const std::vector<SolvedCase>& cases) {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t mismatches = 0, samples = 0;
  for (const SolvedCase& c : cases) {
    const SiteSet s{c.inst.points, c.result.heights};
    const PowerDiagram& d = c.result.diagram;
    for (int t = 0; t < 10000; ++t, ++samples) {
      const Point2 x{u(rng), u(rng)};
      mismatches += !contains(d.cells[argmax(s, x)], x, d.eps);
    }
  }
  double bisector = 0.0;
  std::size_t nearest_miss = 0;
  for (std::uint64_t f = 0; f < 10; ++f) {
    const auto in = testing::random_ot(15, 7000 + f);
    const SiteSet s{in.points, voronoi_heights(in.points)};
    const PowerDiagram d = build_diagram(s, in.domain);
    for (const DiagramEdge& e : d.edges)
      for (Point2 x : {e.a, e.b, 0.5 * (e.a + e.b)})
        bisector = std::max(bisector, std::abs(distance(x, in.points[e.i]) - distance(x, in.points[e.j])));
    for (int t = 0; t < 10000; ++t) {
      const Point2 x{u(rng), u(rng)};
      std::size_t nearest = 0;
      for (std::size_t i = 1; i < s.size(); ++i)
        if (distance(x, in.points[i]) < distance(x, in.points[nearest])) nearest = i;
      nearest_miss += !contains(d.cells[nearest], x, d.eps);
    }
  }
  o.require(mismatches == 0, fmt("%zu argmax mismatches", mismatches));
  o.require(bisector <= 1e-12, fmt("bisector distance gap %.3g", bisector));
  o.require(nearest_miss == 0, fmt("%zu nearest-site mismatches", nearest_miss));
  if (o.pass)
    o.detail = fmt("%zu samples on %zu fixtures match argmax; 10 Voronoi instances match bisectors (%.1e)", samples,
                   cases.size(), bisector);
  return o;
}

// Single interior point at the centre of the unit square; affine boundary data.
DmaeProblem near_affine(double A, Point2 q, double c) {
  DmaeProblem p;
  p.boundary = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (Point2 v : p.boundary) p.boundary_values.push_back(dot(v, q) + c);
  p.interior = {{0.5, 0.5}};
  p.targets = {A};
  return p;
}

Outcome criterion_limits() {
  Outcome o;
  const SolveResult one = solve_ot(std::vector<Point2>{{0.3, 2.0}}, unit_square(), Density::affine(0.2, 0.1, 1.0),
                                   std::vector<double>{total_mass(unit_square(), Density::affine(0.2, 0.1, 1.0))});
  o.require(one.converged && one.diagram.cells[0].size() == 4 &&
                std::abs(area(one.diagram.cells[0]) - 1.0) <= 1e-15,
            "k = 1 cell is not the domain");

  const Point2 q{0.8, -0.3};
  const double c = 0.25, affine = -(dot(Point2{0.5, 0.5}, q) + c);
  std::string gaps;
  double last_gap = 0.0;
  for (double A : {1e-6, 1e-8, 1e-10}) {
    const DmaeSolution s = solve_dmae(near_affine(A, q, c));
    o.require(s.solve.converged, fmt("near-affine A = %.0e did not converge", A));
    last_gap = std::abs(s.heights[0] - affine);
    gaps += fmt("%s%.0e:%.1e", gaps.empty() ? "" : " ", A, last_gap);
  }
  o.require(last_gap < kNearAffine, fmt("near-affine gap %.3g as A -> 0", last_gap));

  bool rejected_ot = false, rejected_dmae = false;
  try {
    solve_ot(std::vector<Point2>{{0.2, 0.2}, {0.7, 0.4}, {0.2, 0.2}}, unit_square(), Density::uniform(),
             std::vector<double>{0.3, 0.4, 0.3});
  } catch (const Error& e) {
    rejected_ot = e.code() == ErrorCode::DuplicateSites;
  }
  try {
    DmaeProblem p = near_affine(0.1, q, c);
    p.interior.push_back({0.5, 0.5});
    p.targets.push_back(0.1);
    solve_dmae(p);
  } catch (const Error& e) {
    rejected_dmae = e.code() == ErrorCode::DuplicateSites;
  }
  o.require(rejected_ot && rejected_dmae, "duplicate sites not rejected with DuplicateSites");
  if (o.pass) o.detail = "k = 1 owns the domain; |h - affine| by A: " + gaps + "; duplicates rejected";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    failures += !o.pass;
    std::printf("criterion %d %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  const std::vector<OtCase> calculus = calculus_instances();
  report(1, "gradient identity", [&] { return criterion_gradient(calculus); });
  report(2, "hessian identity", [&] { return criterion_hessian(calculus); });

  double solve_seconds = 0.0;
  std::vector<SolvedCase> solved;
  try {
    solved = solved_instances(solve_seconds);
  } catch (const std::exception& e) {
    std::printf("solving the 50 instances threw: %s\n", e.what());
  }
  const auto need_solved = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (solved.size() != 50) return {false, "instances failed to solve"};
      return fn();
    };
  };
  report(3, "existence and uniqueness", need_solved([&] { return criterion_existence(solved, solve_seconds); }));
  report(4, "strict convexity", need_solved([&] { return criterion_rigidity(solved); }));
  report(5, "transport cost", criterion_transport_cost);
  report(6, "mass conservation", need_solved([&] { return criterion_mass(solved); }));
  report(7, "monge-ampere dirichlet", criterion_dmae);
  report(8, "power diagram", need_solved([&] { return criterion_diagram(solved); }));
  report(9, "limit cases", criterion_limits);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
