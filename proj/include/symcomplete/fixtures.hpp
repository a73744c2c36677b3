#pragma once

#include "symcomplete/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace symcomplete::fixtures {

enum class ShapeKind { Box, Wedge, Ellipsoid, CompositeSymmetric, AsymmetricBlob };

inline constexpr ShapeKind kSymmetricKinds[] = {ShapeKind::Box, ShapeKind::Wedge, ShapeKind::Ellipsoid,
                                                ShapeKind::CompositeSymmetric};

std::string_view to_string(ShapeKind kind);
/// Throws InvalidArgument on an unknown name.
ShapeKind parse_kind(std::string_view name);

/**
 * Shape proportions are drawn from `seed`; the planted plane is x = 0 in the
 * shape frame and is mapped by `pose`.
 */
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Box;
    std::size_t point_count = 4096;
    RigidTransform pose = RigidTransform::identity();
    std::uint64_t seed = 0;
};

struct Fixture {
    PointCloud cloud;
    /// Plane the sampling is paired across; absent for AsymmetricBlob.
    std::optional<Plane> plane;
    /// Every symmetry plane of the shape (the planted one first).
    std::vector<Plane> symmetry_planes;
    BoundingBox bounds;
};

/// The planted plane of `spec` after posing (x = 0 in the shape frame).
Plane planted_plane(const ShapeSpec& spec);

/**
 * Deterministic per spec. Symmetric kinds are mirror-paired: points come in
 * pairs (x, T(x)) across the planted plane, plus one point on the plane when
 * the count is odd. Throws InvalidArgument for fewer than 100 points.
 */
Fixture generate(const ShapeSpec& spec);

/// Uniform random rotation and a translation with coordinates in
/// [-max_translation, max_translation].
RigidTransform random_pose(std::uint64_t seed, double max_translation = 1.0);

/// Pose whose planted normal lands on a coordinate axis (either sign), spun
/// by a random angle about that axis and translated like random_pose. Models
/// canonically aligned scans: the bounding-box centroid stays on the plane.
RigidTransform canonical_pose(std::uint64_t seed, double max_translation = 1.0);

enum class PoseMode { Canonical, Random };

/// `count` specs cycling through the symmetric kinds.
std::vector<ShapeSpec> symmetric_suite(std::size_t count, std::size_t point_count, std::uint64_t seed,
                                       PoseMode mode = PoseMode::Canonical);

}  // namespace symcomplete::fixtures
