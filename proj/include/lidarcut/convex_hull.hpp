#pragma once

#include "lidarcut/geometry.hpp"

#include <span>
#include <vector>

namespace lidarcut {

/// Indices of the extreme points (vertices) of the convex hull, ascending.
/// Handles coincident, collinear and coplanar inputs by falling back to the
/// 0/1/2-dimensional hull. Points lying on a hull face or edge without
/// being a vertex are not reported.
std::vector<std::size_t> convex_hull_vertices(std::span<const Point3> points);

}  // namespace lidarcut
