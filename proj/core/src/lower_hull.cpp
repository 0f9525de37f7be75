#include "alexot/lower_hull.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "alexot/error.hpp"

namespace alexot {

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 sub(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 cross3(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm3(Vec3 a) { return std::sqrt(dot3(a, a)); }

struct Face {
  std::size_t a, b, c;
  Vec3 normal;  // outward, unnormalized
  bool alive = true;
};

}  // namespace

LowerHull lower_hull(std::span<const Point2> points, std::span<const double> z) {
  if (points.size() != z.size()) throw Error(ErrorCode::InvalidInput, "lower_hull: points/z size mismatch");
  const std::size_t n = points.size();
  LowerHull out;
  if (n < 4) {
    out.degenerate = true;
    if (n == 3 && std::abs(cross(points[1] - points[0], points[2] - points[0])) > 0.0) {
      out.degenerate = false;
      if (cross(points[1] - points[0], points[2] - points[0]) > 0.0)
        out.triangles.push_back({0, 1, 2});
      else
        out.triangles.push_back({0, 2, 1});
    }
    return out;
  }

  std::vector<Vec3> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = {points[i].x, points[i].y, z[i]};
  double scale = 0.0;
  for (std::size_t i = 1; i < n; ++i) scale = std::max(scale, norm3(sub(p[i], p[0])));
  if (scale == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double eps = 1e-12 * scale;

  // Initial tetrahedron from well-separated points.
  std::size_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < n; ++i)
    if (double d = norm3(sub(p[i], p[i0])); d > best) best = d, i1 = i;
  best = 0.0;
  const Vec3 axis = sub(p[i1], p[i0]);
  for (std::size_t i = 0; i < n; ++i)
    if (double d = norm3(cross3(axis, sub(p[i], p[i0]))) / norm3(axis); d > best) best = d, i2 = i;
  if (best <= eps) {
    out.degenerate = true;
    return out;
  }
  best = 0.0;
  const Vec3 base_normal = cross3(axis, sub(p[i2], p[i0]));
  for (std::size_t i = 0; i < n; ++i)
    if (double d = std::abs(dot3(base_normal, sub(p[i], p[i0]))) / norm3(base_normal); d > best) best = d, i3 = i;
  if (best <= eps) {
    out.degenerate = true;
    return out;
  }

  std::vector<Face> faces;
  auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    faces.push_back({a, b, c, cross3(sub(p[b], p[a]), sub(p[c], p[a])), true});
  };
  const std::array<std::array<std::size_t, 4>, 4> initial{{{i0, i1, i2, i3}, {i0, i3, i1, i2}, {i1, i3, i2, i0}, {i0, i2, i3, i1}}};
  for (const auto& f : initial) {
    const Vec3 nrm = cross3(sub(p[f[1]], p[f[0]]), sub(p[f[2]], p[f[0]]));
    if (dot3(nrm, sub(p[f[3]], p[f[0]])) > 0.0)
      add_face(f[0], f[2], f[1]);
    else
      add_face(f[0], f[1], f[2]);
  }

  for (std::size_t q = 0; q < n; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::set<std::pair<std::size_t, std::size_t>> visible_edges;
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const Face& face = faces[f];
      if (!face.alive) continue;
      if (dot3(face.normal, sub(p[q], p[face.a])) > eps * norm3(face.normal)) visible.push_back(f);
    }
    if (visible.empty()) continue;
    for (std::size_t f : visible) {
      const Face& face = faces[f];
      visible_edges.insert({face.a, face.b});
      visible_edges.insert({face.b, face.c});
      visible_edges.insert({face.c, face.a});
    }
    for (std::size_t f : visible) faces[f].alive = false;
    for (const auto& [u, v] : visible_edges)
      if (!visible_edges.contains({v, u})) add_face(u, v, q);
  }

  for (const Face& f : faces) {
    if (!f.alive) continue;
    if (f.normal.z < -1e-12 * norm3(f.normal)) out.triangles.push_back({f.a, f.c, f.b});
  }
  std::sort(out.triangles.begin(), out.triangles.end());
  return out;
}

}  // namespace alexot
