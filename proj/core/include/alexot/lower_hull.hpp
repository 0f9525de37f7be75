#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "alexot/geometry.hpp"

namespace alexot {

/// Lower faces of the 3D convex hull of the lifted points (points[i], z[i]).
/// triangles are counterclockwise in the xy projection. degenerate is set
/// when all lifted points are coplanar (no 3D hull exists).
struct LowerHull {
  std::vector<std::array<std::size_t, 3>> triangles;
  bool degenerate = false;
};

/// Incremental 3D hull, O(n^2). Points are inserted in index order, so ties
/// between coplanar configurations resolve the same way on every run.
LowerHull lower_hull(std::span<const Point2> points, std::span<const double> z);

}  // namespace alexot
