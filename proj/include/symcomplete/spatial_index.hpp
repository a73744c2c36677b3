#pragma once

#include "symcomplete/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace symcomplete {

struct Neighbor {
    std::size_t index = 0;
    double distance_sq = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/**
 * Static kd-tree over a copy of a cloud's points.
 *
 * All queries are exact: results equal a linear scan. Ordered results are
 * sorted by (squared distance, index), which makes ties deterministic.
 * Read-only after construction, so concurrent queries are safe.
 */
class SpatialIndex {
public:
    SpatialIndex() = default;
    explicit SpatialIndex(std::vector<Point3> points, std::size_t leaf_size = 12);
    explicit SpatialIndex(const PointCloud& cloud, std::size_t leaf_size = 12)
        : SpatialIndex(cloud.points, leaf_size) {}

    std::size_t size() const { return points_.size(); }
    const Point3& point(std::size_t i) const { return points_[i]; }

    /// The `k` closest points (fewer if the index holds fewer).
    std::vector<Neighbor> knn(const Point3& query, std::size_t k) const;

    /// Closest point; the index must be non-empty.
    Neighbor nearest(const Point3& query) const;

    /// Every point with distance <= radius. An infinite radius returns all points.
    std::vector<Neighbor> radius(const Point3& query, double radius) const;

    /// Number of points inside the closed axis-aligned cube of side `side`
    /// centred at `center`.
    std::size_t cube_count(const Point3& center, double side) const;

    /// Indices (ascending) of points inside the same closed cube.
    std::vector<std::size_t> cube_collect(const Point3& center, double side) const;

private:
    struct Node {
        Eigen::Vector3d lo;
        Eigen::Vector3d hi;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    std::vector<Point3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_ = 12;
};

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

/// Mean over all points of the distance to the nearest point at a different
/// location. Requires at least two distinct locations.
double average_nn_distance(const PointCloud& cloud);
double average_nn_distance(const PointCloud& cloud, const SpatialIndex& index);

}  // namespace symcomplete
