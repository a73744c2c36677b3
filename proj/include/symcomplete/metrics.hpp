#pragma once

#include "symcomplete/geometry.hpp"
#include "symcomplete/spatial_index.hpp"

#include <cstddef>
#include <vector>

namespace symcomplete {

/// Cube side `d` is in model units; `epsilon` is the balance tolerance.
struct BalanceConfig {
    double cube_side = 0.0;
    double epsilon = 0.3;

    void validate() const;
};

inline constexpr double kDefaultEpsilon = 0.3;
inline constexpr double kDefaultCubeSideFactor = 4.0;

/// d = 4 x average nearest-neighbor spacing, epsilon = 0.3.
BalanceConfig default_balance_config(double average_spacing);

struct BalanceCounts {
    std::size_t in_first = 0;   // |Q(x, d) ∩ P|
    std::size_t in_second = 0;  // |Q(x, d) ∩ P'|
    bool balanced = false;
};

/// An empty cube (no point of either cloud) counts as unbalanced.
bool balance_rule(std::size_t in_first, std::size_t in_second, double epsilon);

BalanceCounts is_balanced(const Point3& x, const SpatialIndex& first, const SpatialIndex& second,
                          const BalanceConfig& cfg);

/// BD = 1 - B / (|P| + |P'|), B the number of balanced points of P ∪ P'.
double balanced_distance(const PointCloud& first, const PointCloud& second, const BalanceConfig& cfg);
double balanced_distance(const PointCloud& first, const SpatialIndex& first_index, const PointCloud& second,
                         const SpatialIndex& second_index, const BalanceConfig& cfg);

/// Sum of both directed mean nearest-neighbor (plain Euclidean) distances.
double chamfer_distance(const PointCloud& a, const PointCloud& b);
double chamfer_distance(const PointCloud& a, const SpatialIndex& a_index, const PointCloud& b,
                        const SpatialIndex& b_index);

/// Mean over `from` of the distance to the closest point of `to`.
double directed_mean_distance(const PointCloud& from, const SpatialIndex& to);

inline constexpr double kDefaultAngleThreshold = 0.2;
/// Center threshold as a fraction of the ground-truth bounding-box diagonal.
inline constexpr double kDefaultCenterFraction = 0.05;

struct SymmetryEvalConfig {
    double angle_threshold = kDefaultAngleThreshold;  // radians
    double center_threshold = 0.0;  // model units

    void validate() const;
};

/// theta = 0.2 rad, tau = diagonal / 20.
SymmetryEvalConfig default_symmetry_eval(const BoundingBox& gt_bounds);

/// Closest point to `x` on the part of `plane` inside `box`. When the plane
/// misses the box the unrestricted projection is returned.
Point3 project_onto_plane_patch(const Point3& x, const Plane& plane, const BoundingBox& box);

/// Angle test on |<n, n_gt>| and distance test of the predicted anchor to the
/// ground-truth plane patch.
bool symmetry_correct(const Plane& predicted, const Plane& truth, const BoundingBox& gt_bounds,
                      const SymmetryEvalConfig& cfg);

struct SymmetryGroundTruth {
    std::vector<Plane> planes;
    BoundingBox bounds;
};

/// Fraction of objects whose prediction matches at least one of their planes.
double accuracy(const std::vector<Plane>& predictions, const std::vector<SymmetryGroundTruth>& truths,
                const SymmetryEvalConfig& cfg);

}  // namespace symcomplete
