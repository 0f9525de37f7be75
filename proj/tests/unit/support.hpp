#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "alexot/dmae.hpp"
#include "alexot/measure.hpp"
#include "alexot/power_diagram.hpp"

namespace alexot::testing {

// [-1/2, 1/2]^2: sites placed symmetrically about the origin are symmetric
// for the potential max_i x . p_i + h_i at h = 0.
inline Polygon centered_square() { return make_box({-0.5, -0.5}, {0.5, 0.5}); }

struct OtInstance {
  std::vector<Point2> points;
  std::vector<double> targets;
  Polygon domain;
  Density sigma;
};

// Sites uniform in [lo, hi]^2 (default: in and around the unit square),
// targets uniform in [0.5, 1.5] normalized to the domain mass.
inline OtInstance random_ot(std::size_t k, std::uint64_t seed, const Density& sigma = Density::uniform(),
                            double lo = -0.2, double hi = 1.2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(lo, hi), weight(0.5, 1.5);
  OtInstance inst;
  inst.domain = unit_square();
  inst.sigma = sigma;
  for (std::size_t i = 0; i < k; ++i) {
    inst.points.push_back({coord(rng), coord(rng)});
    inst.targets.push_back(weight(rng));
  }
  double sum = 0.0;
  for (double a : inst.targets) sum += a;
  const double mass = total_mass(inst.domain, sigma);
  for (double& a : inst.targets) a *= mass / sum;
  return inst;
}

// Boundary: m points on a jittered circle around (0.5, 0.5); interior points
// drawn inside a shrunken copy; boundary values from a random convex-ish quadratic.
inline DmaeProblem random_dmae(std::size_t m, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DmaeProblem p;
  const double two_pi = 6.283185307179586;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = two_pi * (static_cast<double>(i) + 0.3 * unit(rng)) / static_cast<double>(m);
    p.boundary.push_back({0.5 + 0.5 * std::cos(t), 0.5 + 0.5 * std::sin(t)});
  }
  const double qa = unit(rng), qb = unit(rng), lin = unit(rng) - 0.5;
  for (const Point2& v : p.boundary) p.boundary_values.push_back(qa * v.x * v.x + qb * v.y * v.y + lin * v.x);
  const Polygon omega = convex_hull(p.boundary);
  const Point2 c = centroid(omega);
  while (p.interior.size() < k) {
    const Point2 x{unit(rng), unit(rng)};
    const Point2 shrunk = c + 0.7 * (x - c);
    if (!contains(omega, shrunk) || boundary_distance(omega, shrunk) < 0.02) continue;
    bool far = true;
    for (const Point2& q : p.interior) far = far && distance(q, shrunk) > 0.02;
    if (!far) continue;
    p.interior.push_back(shrunk);
    p.targets.push_back(0.05 + unit(rng));
  }
  return p;
}

}  // namespace alexot::testing
