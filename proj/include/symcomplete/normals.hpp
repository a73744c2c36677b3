#pragma once

#include "symcomplete/geometry.hpp"

#include <variant>
#include <vector>

namespace symcomplete {

/// Flip normals towards a viewpoint: <n, viewpoint - x> >= 0.
struct Viewpoint {
    Point3 position = Point3::Zero();
};

/// Flip normals into the half-space of an axis: <n, axis> >= 0.
struct Axis {
    Vec3 direction = Vec3::UnitZ();
};

using OrientationReference = std::variant<Viewpoint, Axis>;

struct NormalParams {
    std::size_t neighbor_count = 30;
    OrientationReference orientation = Axis{};

    /// Throws InvalidArgument when k < 3 or an Axis reference is not unit.
    void validate() const;
};

enum class NormalQuality {
    Ok,
    /// Two smallest covariance eigenvalues tie (locally linear data).
    LowConfidence,
    /// All neighbors coincide; the normal was set to +z.
    Degenerate,
};

struct NormalEstimate {
    PointCloud cloud;
    std::vector<NormalQuality> quality;

    std::size_t count(NormalQuality q) const;
};

/**
 * Local plane fit over the k nearest neighbors (the point itself included).
 * The normal is the eigenvector of the neighborhood covariance with the
 * smallest eigenvalue, oriented with `params.orientation`.
 *
 * Requires |P| > k.
 */
NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params);

/// Normal of a single neighborhood (unoriented). Exposed for testing.
Vec3 fit_normal(const std::vector<Point3>& neighborhood, NormalQuality* quality = nullptr);

/// Flips normals so they agree with `reference`. Idempotent.
PointCloud orient_normals(const PointCloud& cloud, const OrientationReference& reference);

}  // namespace symcomplete
