#include <functional>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "alexot/dmae.hpp"
#include "alexot/energy.hpp"
#include "alexot/error.hpp"
#include "alexot/lower_hull.hpp"
#include "support.hpp"

namespace alexot {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidInput;
}

DmaeProblem square_pit(double target) {
  DmaeProblem p;
  p.boundary = unit_square().vertices;
  p.boundary_values = {0, 0, 0, 0};
  p.interior = {{0.5, 0.5}};
  p.targets = {target};
  return p;
}

// Area of { x : x . p + h >= x . v_i - g_i for all i }, cut out of a big box.
double pit_cell_area(const DmaeProblem& p, double h) {
  Polygon cell = make_box({-100, -100}, {100, 100});
  for (std::size_t i = 0; i < p.boundary.size(); ++i)
    cell = clip(cell, HalfPlane{p.boundary[i] - p.interior[0], h + p.boundary_values[i]}, 1e-14);
  return area(cell);
}

// Brute-force evaluation of the dual by its min formula: the smallest
// barycentric interpolation of -h over triangles of sites containing y.
double dual_by_min_formula(const std::vector<Point2>& pts, const std::vector<double>& h, Point2 y) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = pts.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) {
        const double det = cross(pts[b] - pts[a], pts[c] - pts[a]);
        if (std::abs(det) < 1e-14) continue;
        const double tb = cross(y - pts[a], pts[c] - pts[a]) / det;
        const double tc = cross(pts[b] - pts[a], y - pts[a]) / det;
        const double ta = 1.0 - tb - tc;
        if (ta < -1e-12 || tb < -1e-12 || tc < -1e-12) continue;
        best = std::min(best, -(ta * h[a] + tb * h[b] + tc * h[c]));
      }
  return best;
}

TEST(DmaeProblem, Validation) {
  DmaeProblem p = square_pit(1.0);
  p.boundary.push_back({0.5, 0.2});
  p.boundary_values.push_back(0.0);
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidBoundary);

  p = square_pit(1.0);
  p.interior[0] = {1.5, 0.5};
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InteriorPointOutside);
  p.interior[0] = {1.0, 0.5};  // on the boundary
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InteriorPointOutside);

  p = square_pit(1.0);
  p.interior = {{0.3, 0.3}, {0.3, 0.3}};
  p.targets = {0.5, 0.5};
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::DuplicateSites);

  p = square_pit(-1.0);
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidInput);
}

TEST(LowerHull, PyramidHasFourFaces) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const std::vector<double> z{0, 0, 0, 0, -1};
  const LowerHull h = lower_hull(pts, z);
  EXPECT_FALSE(h.degenerate);
  EXPECT_EQ(h.triangles.size(), 4u);
  for (const auto& t : h.triangles) EXPECT_TRUE(t[0] == 4 || t[1] == 4 || t[2] == 4);
}

TEST(LowerHull, CoplanarIsDegenerate) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.3, 0.6}};
  const std::vector<double> z{0, 1, 3, 2, 0.3 + 2 * 0.6};
  EXPECT_TRUE(lower_hull(pts, z).degenerate);
}

TEST(LegendreDual, FlatForZeroHeights) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({u(rng), u(rng)});
  const PlConvexFunction w = legendre_dual(pts, std::vector<double>(8, 0.0));
  EXPECT_TRUE(w.degenerate);
  EXPECT_EQ(w.cells.size(), 1u);
  EXPECT_NEAR(w(centroid(w.domain)), 0.0, 1e-15);
}

TEST(LegendreDual, VoronoiHeightsGiveDelaunay) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts;
  for (int i = 0; i < 15; ++i) pts.push_back({u(rng), u(rng)});
  const PlConvexFunction w = legendre_dual(pts, voronoi_heights(pts));
  ASSERT_FALSE(w.degenerate);
  for (const auto& cell : w.cells) {
    ASSERT_EQ(cell.size(), 3u);
    const Point2 a = pts[cell[0]], b = pts[cell[1]], c = pts[cell[2]];
    // empty circumcircle
    const double d = 2.0 * cross(b - a, c - a);
    const Point2 ab = b - a, ac = c - a;
    const Point2 center = a + Point2{(ac.y * squared_norm(ab) - ab.y * squared_norm(ac)) / d,
                                     (ab.x * squared_norm(ac) - ac.x * squared_norm(ab)) / d};
    const double r = distance(center, a);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != cell[0] && i != cell[1] && i != cell[2]) EXPECT_GT(distance(center, pts[i]), r - 1e-12);
  }
}

TEST(LegendreDual, PyramidGradients) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const PlConvexFunction w = legendre_dual(pts, std::vector<double>{0, 0, 0, 0, 1});
  ASSERT_EQ(w.cells.size(), 4u);
  std::vector<Point2> g = w.gradients;
  std::sort(g.begin(), g.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  const std::vector<Point2> want{{-2, 0}, {0, -2}, {0, 2}, {2, 0}};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(distance(g[i], want[i]), 1e-14);
  EXPECT_NEAR(w({0.5, 0.5}), -1.0, 1e-15);
  EXPECT_NEAR(discrete_hessian_det(w, {0.5, 0.5}), 8.0, 1e-13);
  EXPECT_EQ(code_of([&] { discrete_hessian_det(w, {1, 0}); }), ErrorCode::BoundaryVertex);
}

TEST(LegendreDual, AffineHasZeroDeterminant) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.4, 0.55}};
  std::vector<double> h;
  for (const Point2& p : pts) h.push_back(-(0.7 * p.x - 0.2 * p.y + 0.1));
  const PlConvexFunction w = legendre_dual(pts, h);
  EXPECT_TRUE(w.degenerate);
  EXPECT_EQ(discrete_hessian_det(w, {0.4, 0.55}), 0.0);
}

TEST(LegendreDual, MinFormulaAndDoubleDual) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0), hu(-0.3, 0.3);
  std::vector<Point2> pts;
  std::vector<double> h;
  for (int i = 0; i < 9; ++i) {
    pts.push_back({u(rng), u(rng)});
    h.push_back(hu(rng));
  }
  const PlConvexFunction w = legendre_dual(pts, h);
  const auto box = bounding_box(pts);
  int checked = 0;
  while (checked < 1000) {
    const Point2 y{box[0].x + u(rng) * (box[1].x - box[0].x), box[0].y + u(rng) * (box[1].y - box[0].y)};
    if (!contains(w.domain, y)) continue;
    ++checked;
    EXPECT_NEAR(w(y), dual_by_min_formula(pts, h, y), 1e-10);
  }
  // (u*)*(x) = max over the vertices of w of x . v - w(v) reproduces u
  for (int t = 0; t < 1000; ++t) {
    const Point2 x{4 * u(rng) - 2, 4 * u(rng) - 2};
    double u_x = -std::numeric_limits<double>::infinity(), dd = u_x;
    for (std::size_t i = 0; i < pts.size(); ++i) u_x = std::max(u_x, dot(x, pts[i]) + h[i]);
    for (std::size_t v : w.vertices) dd = std::max(dd, dot(x, pts[v]) - w(pts[v]));
    EXPECT_NEAR(dd, u_x, 1e-10);
  }
}

TEST(SolveDmae, SquarePitMatchesBisection) {
  const DmaeProblem p = square_pit(1.0);
  // oracle: bisection on the clipped cell area
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pit_cell_area(p, mid) < 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(0.5 * (lo + hi), 0.35355339059327379, 1e-14);  // frozen oracle value, sqrt(1/8)

  const DmaeSolution s = solve_dmae(p);
  ASSERT_TRUE(s.solve.converged);
  EXPECT_NEAR(s.heights[0], 0.35355339059327379, 1e-10);
  EXPECT_NEAR(s.dual({0.5, 0.5}), -s.heights[0], 1e-14);
  EXPECT_NEAR(discrete_hessian_det(s.dual, {0.5, 0.5}), 1.0, 1e-9);
}

TEST(SolveDmae, NearAffineLimit) {
  // g_i = v_i . q + c; the pit depth delta = h + p . q + c obeys area = C delta^2
  const Point2 q{0.8, -0.3};
  const double c = 0.25;
  DmaeProblem p = square_pit(1e-6);
  for (std::size_t i = 0; i < 4; ++i) p.boundary_values[i] = dot(p.boundary[i], q) + c;
  const double affine = -(dot(p.interior[0], q) + c);

  DmaeProblem unit_pit = square_pit(1.0);
  const double C = pit_cell_area(unit_pit, 1.0);  // area for delta = 1
  EXPECT_NEAR(C, 8.0, 1e-12);

  const DmaeSolution s = solve_dmae(p);
  ASSERT_TRUE(s.solve.converged);
  EXPECT_NEAR(s.heights[0] - affine, std::sqrt(1e-6 / C), 1e-10);

  p.targets = {1e-8};
  const DmaeSolution s8 = solve_dmae(p);
  ASSERT_TRUE(s8.solve.converged);
  EXPECT_LT(std::abs(s8.heights[0] - affine), 1e-4);
}

class RandomDmae : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomDmae, SolutionIsConsistent) {
  const DmaeProblem p = testing::random_dmae(4 + GetParam() % 5, 1 + GetParam() % 10, GetParam());
  const std::size_t k = p.interior.size(), m = p.boundary.size();
  const DmaeSolution s = solve_dmae(p);
  ASSERT_TRUE(s.solve.converged);
  double total = 0.0;
  for (double a : p.targets) total += a;

  // boundary lifts carry g exactly, interior lifts carry -h
  for (std::size_t i = 0; i < m; ++i) {
    EXPECT_EQ(s.extended.heights[k + i], -p.boundary_values[i]);
    EXPECT_EQ(s.dual.values[k + i], p.boundary_values[i]);
    EXPECT_NEAR(s.dual(p.boundary[i]), p.boundary_values[i], 1e-12);
  }
  std::vector<std::size_t> all(k + m);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(s.dual.vertices, all);
  for (std::size_t j = 0; j < k; ++j) {
    EXPECT_NEAR(s.dual(p.interior[j]), -s.heights[j], 1e-12);
    const double det = discrete_hessian_det(s.dual, p.interior[j]);
    EXPECT_NEAR(det, p.targets[j], 1e-8 * total);
    EXPECT_NEAR(det, area(s.diagram.cells[j]), 1e-10);
    EXPECT_TRUE(s.diagram.boundary_edges[j].empty());
  }
  for (std::size_t i = 0; i < m; ++i) EXPECT_GT(area(s.diagram.cells[k + i]), 0.0);

  // strict convexity of the reduced energy
  const Eigen::MatrixXd H(measure_jacobian(s.diagram, s.extended, Density::uniform(), k));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues()[0], 0.0);

  // midpoint convexity of w
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 1000) {
    const Point2 x{u(rng), u(rng)}, y{u(rng), u(rng)};
    if (!contains(s.dual.domain, x) || !contains(s.dual.domain, y)) continue;
    ++tested;
    EXPECT_LE(s.dual(0.5 * (x + y)), 0.5 * (s.dual(x) + s.dual(y)) + 1e-12);
  }

  // unique: a perturbed start lands on the same heights
  std::vector<double> start = dmae_feasible_heights(p);
  for (double& h : start) h += 0.01 + 0.001 * u(rng);
  const DmaeSolution again = solve_dmae(p, {}, start);
  ASSERT_TRUE(again.solve.converged);
  for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(again.heights[j], s.heights[j], 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomDmae, ::testing::Range<std::uint64_t>(1, 9));

TEST(SolveDmae, BoundaryHeightsNeverMove) {
  const DmaeProblem p = testing::random_dmae(6, 5, 42);
  const DmaeSolution s = solve_dmae(p);
  ASSERT_TRUE(s.solve.converged);
  for (std::size_t i = 0; i < p.boundary.size(); ++i)
    EXPECT_EQ(s.extended.heights[p.interior.size() + i], -p.boundary_values[i]);
  for (const IterationRecord& r : s.solve.log) EXPECT_GT(r.min_cell_measure, 0.0);
}

}  // namespace
}  // namespace alexot
