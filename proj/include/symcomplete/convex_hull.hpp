#pragma once

#include "symcomplete/geometry.hpp"

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace symcomplete {

/**
 * 3D convex hull of a point set, indices referring to the input cloud.
 *
 * `faces` are triangles wound counter-clockwise seen from outside.
 * `edges` are the undirected hull edges (i < j, sorted) where the two
 * adjacent triangles are not coplanar, i.e. the edges of the hull polytope
 * rather than of its triangulation.
 */
struct ConvexHull {
    std::vector<std::size_t> vertices;
    std::vector<std::array<std::size_t, 3>> faces;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Quickhull. Throws DegenerateInput for fewer than 4 points or for
/// collinear/coplanar input.
ConvexHull convex_hull(const PointCloud& cloud);
ConvexHull convex_hull(const std::vector<Point3>& points);

}  // namespace symcomplete
