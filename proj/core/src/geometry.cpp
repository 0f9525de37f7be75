#include "alexot/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace alexot {

namespace {

// Removes consecutive (cyclic) vertices closer than eps. The surviving vertex
// takes the label of the outgoing edge of the last vertex merged into it.
void merge_close_vertices(LabeledPolygon& poly, double eps) {
  const double eps2 = eps * eps;
  auto& v = poly.vertices;
  auto& l = poly.labels;
  if (v.empty()) return;
  std::vector<Point2> out_v;
  std::vector<int> out_l;
  out_v.reserve(v.size());
  out_l.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!out_v.empty() && squared_norm(v[i] - out_v.back()) <= eps2) {
      out_l.back() = l[i];
      continue;
    }
    out_v.push_back(v[i]);
    out_l.push_back(l[i]);
  }
  while (out_v.size() > 1 && squared_norm(out_v.back() - out_v.front()) <= eps2) {
    out_v.pop_back();
    out_l.pop_back();
  }
  v = std::move(out_v);
  l = std::move(out_l);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

Polygon make_box(Point2 lo, Point2 hi) {
  return Polygon{{lo, {hi.x, lo.y}, hi, {lo.x, hi.y}}};
}

Polygon unit_square() { return make_box({0.0, 0.0}, {1.0, 1.0}); }

double signed_area(const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
  return 0.5 * s;
}

double area(const Polygon& poly) { return std::abs(signed_area(poly)); }

Point2 centroid(const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.empty()) return {};
  const Point2 o = v.front();
  const MomentTable m = moments(poly, 1, o);
  if (m(0, 0) <= 0.0) {
    Point2 s{};
    for (const Point2& p : v) s = s + p;
    return (1.0 / static_cast<double>(v.size())) * s;
  }
  return o + Point2{m(1, 0) / m(0, 0), m(0, 1) / m(0, 0)};
}

double perimeter(const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) s += distance(v[i], v[(i + 1) % n]);
  return s;
}

double diameter(std::span<const Point2> points) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      d2 = std::max(d2, squared_norm(points[i] - points[j]));
  return std::sqrt(d2);
}

std::array<Point2, 2> bounding_box(std::span<const Point2> points) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Point2 lo{inf, inf}, hi{-inf, -inf};
  for (const Point2& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

LabeledPolygon clip(const LabeledPolygon& poly, const HalfPlane& hp, int label, double eps) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n == 0) return {};

  std::vector<double> d(n);
  double scale = std::abs(hp.offset);
  for (const Point2& p : v) scale = std::max(scale, std::abs(hp.normal.x * p.x) + std::abs(hp.normal.y * p.y));
  // vertices within rounding noise of the line count as on it
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  bool any_out = false;
  bool any_in = false;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = hp.evaluate(v[i]);
    if (std::abs(d[i]) <= noise) d[i] = 0.0;
    (d[i] > 0.0 ? any_out : any_in) = true;
  }
  if (!any_out) return poly;
  if (!any_in) return {};

  LabeledPolygon out;
  out.vertices.reserve(n + 2);
  out.labels.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool in_i = d[i] <= 0.0;
    const bool in_j = d[j] <= 0.0;
    if (in_i) {
      out.vertices.push_back(v[i]);
      out.labels.push_back(poly.labels[i]);
      if (!in_j) {
        const double t = d[i] / (d[i] - d[j]);
        out.vertices.push_back(v[i] + t * (v[j] - v[i]));
        out.labels.push_back(label);
      }
    } else if (in_j) {
      const double t = d[i] / (d[i] - d[j]);
      out.vertices.push_back(v[i] + t * (v[j] - v[i]));
      out.labels.push_back(poly.labels[i]);
    }
  }

  merge_close_vertices(out, eps);
  if (out.vertices.size() < 3) return {};
  // Width of what survived, measured away from the clipping line.
  const double inv_n = 1.0 / norm(hp.normal);
  double depth = 0.0;
  for (const Point2& p : out.vertices) depth = std::max(depth, -hp.evaluate(p) * inv_n);
  if (depth <= eps) return {};
  Polygon as_poly{out.vertices};
  if (signed_area(as_poly) <= 0.0) return {};
  return out;
}

Polygon clip(const Polygon& poly, const HalfPlane& hp, double eps) {
  LabeledPolygon lp{poly.vertices, std::vector<int>(poly.vertices.size(), 0)};
  return Polygon{clip(lp, hp, 0, eps).vertices};
}

Polygon clip(const Polygon& poly, const HalfPlane& hp) { return clip(poly, hp, 1e-9 * diameter(poly)); }

Polygon intersect(const Polygon& a, const Polygon& b, double eps) {
  Polygon result = a;
  const auto& w = b.vertices;
  for (std::size_t i = 0, n = w.size(); i < n && !result.empty(); ++i) {
    const Point2 e = w[(i + 1) % n] - w[i];
    const HalfPlane hp{{e.y, -e.x}, dot(Point2{e.y, -e.x}, w[i])};
    result = clip(result, hp, eps);
  }
  if (w.size() < 3) return {};
  return result;
}

Polygon convex_hull(std::span<const Point2> points) {
  std::vector<Point2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return Polygon{p};
  std::vector<Point2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return Polygon{std::move(h)};
}

bool contains(const Polygon& poly, Point2 p, double eps) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return false;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2 e = v[(i + 1) % n] - v[i];
    if (cross(e, p - v[i]) < -eps * norm(e)) return false;
  }
  return true;
}

double boundary_distance(const Polygon& poly, Point2 p) {
  const auto& v = poly.vertices;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2 a = v[i];
    const Point2 e = v[(i + 1) % n] - a;
    const double len2 = squared_norm(e);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, e) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, distance(p, a + t * e));
  }
  return best;
}

bool is_convex_ccw(const Polygon& poly, double eps) {
  const auto& v = poly.vertices;
  if (v.empty()) return true;
  if (v.size() < 3) return false;
  if (signed_area(poly) <= 0.0) return false;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2 e1 = v[(i + 1) % n] - v[i];
    const Point2 e2 = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross(e1, e2) < -eps * norm(e1) * norm(e2)) return false;
  }
  return true;
}

MomentTable moments(const Polygon& poly, int degree, Point2 origin) {
  if (degree < 0 || degree > kMaxMomentDegree) throw std::invalid_argument("moments: degree out of range");
  MomentTable t;
  t.degree_ = degree;
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return t;

  // integral x^p y^q dA = p! q! / (p+q+2)! * sum_i c_i *
  //   sum_{k,l} C(k+l, l) C(p+q-k-l, q-l) x_i^k x_{i+1}^(p-k) y_i^l y_{i+1}^(q-l)
  constexpr int D = kMaxMomentDegree + 1;
  std::array<double, D> ax{}, bx{}, ay{}, by{};
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[i] - origin;
    const Point2 b = v[(i + 1) % n] - origin;
    const double c = cross(a, b);
    ax[0] = bx[0] = ay[0] = by[0] = 1.0;
    for (int e = 1; e <= degree; ++e) {
      ax[e] = ax[e - 1] * a.x;
      bx[e] = bx[e - 1] * b.x;
      ay[e] = ay[e - 1] * a.y;
      by[e] = by[e - 1] * b.y;
    }
    for (int p = 0; p <= degree; ++p) {
      for (int q = 0; p + q <= degree; ++q) {
        double s = 0.0;
        for (int k = 0; k <= p; ++k)
          for (int l = 0; l <= q; ++l)
            s += binomial(k + l, l) * binomial(p + q - k - l, q - l) * ax[k] * bx[p - k] * ay[l] * by[q - l];
        t.m_[p][q] += c * s;
      }
    }
  }
  const double orientation = signed_area(poly) < 0.0 ? -1.0 : 1.0;
  for (int p = 0; p <= degree; ++p)
    for (int q = 0; p + q <= degree; ++q)
      t.m_[p][q] *= orientation * factorial(p) * factorial(q) / factorial(p + q + 2);
  return t;
}

}  // namespace alexot
