#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace alexot {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr double squared_norm(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// { x : normal . x <= offset }
struct HalfPlane {
  Point2 normal;
  double offset = 0.0;

  double evaluate(Point2 p) const { return dot(normal, p) - offset; }
  double signed_distance(Point2 p) const { return evaluate(p) / norm(normal); }
  HalfPlane complement() const { return {-normal, -offset}; }
};

/// Convex polygon, vertices counterclockwise. An empty vertex list is the empty set.
struct Polygon {
  std::vector<Point2> vertices;

  bool empty() const { return vertices.empty(); }
  std::size_t size() const { return vertices.size(); }
  const Point2& operator[](std::size_t i) const { return vertices[i]; }
};

/// Polygon whose edge k (from vertex k to vertex k+1) carries labels[k].
/// Clipping keeps the labels of surviving edge pieces and stamps new edges
/// with the label of the clipping half-plane; the power diagram uses this to
/// recover which neighbour produced each cell edge.
struct LabeledPolygon {
  std::vector<Point2> vertices;
  std::vector<int> labels;

  bool empty() const { return vertices.empty(); }
};

Polygon make_box(Point2 lo, Point2 hi);
Polygon unit_square();

double signed_area(const Polygon& poly);
/// Shoelace area, >= 0; zero for fewer than three vertices.
double area(const Polygon& poly);
Point2 centroid(const Polygon& poly);
double perimeter(const Polygon& poly);
double diameter(std::span<const Point2> points);
inline double diameter(const Polygon& poly) { return diameter(poly.vertices); }

/// Lower-left and upper-right corners of the bounding box.
std::array<Point2, 2> bounding_box(std::span<const Point2> points);

/// Default tolerance for collinearity/emptiness decisions on a domain.
inline double geometric_tolerance(const Polygon& domain) { return 1e-9 * diameter(domain); }

/// poly intersected with hp. Consecutive vertices closer than eps are merged;
/// a result with zero area is returned as the empty polygon.
Polygon clip(const Polygon& poly, const HalfPlane& hp, double eps);
/// Same, with eps = 1e-9 * diameter(poly).
Polygon clip(const Polygon& poly, const HalfPlane& hp);
LabeledPolygon clip(const LabeledPolygon& poly, const HalfPlane& hp, int label, double eps);

/// Intersection of two convex polygons (clips a by every edge of b).
Polygon intersect(const Polygon& a, const Polygon& b, double eps);

/// Counterclockwise convex hull; collinear boundary points are dropped.
Polygon convex_hull(std::span<const Point2> points);

/// True when p lies in the closed polygon, allowing eps slack outside.
bool contains(const Polygon& poly, Point2 p, double eps = 0.0);

/// Distance from p to the polygon boundary.
double boundary_distance(const Polygon& poly, Point2 p);

/// Checks counterclockwise orientation and convexity up to eps (cross
/// products of consecutive edges >= -eps * |e1| |e2|).
bool is_convex_ccw(const Polygon& poly, double eps = 1e-9);

inline constexpr int kMaxMomentDegree = 4;

/// Table of m(a, b) = integral over the polygon of (x - ox)^a (y - oy)^b dA
/// for a + b <= degree.
class MomentTable {
 public:
  double operator()(int a, int b) const { return m_[a][b]; }
  double& at(int a, int b) { return m_[a][b]; }
  int degree() const { return degree_; }

 private:
  friend MomentTable moments(const Polygon&, int, Point2);
  std::array<std::array<double, kMaxMomentDegree + 1>, kMaxMomentDegree + 1> m_{};
  int degree_ = 0;
};

/// Exact polynomial moments via Green's theorem edge sums, taken about
/// origin. degree must lie in [0, kMaxMomentDegree].
MomentTable moments(const Polygon& poly, int degree, Point2 origin = {});

}  // namespace alexot
