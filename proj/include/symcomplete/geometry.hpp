#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <vector>

namespace symcomplete {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance on the length of a normal stored in a PointCloud.
inline constexpr double kCloudNormalTolerance = 1e-6;
/// Tolerance on the length of a Plane normal.
inline constexpr double kPlaneNormalTolerance = 1e-9;

/**
 * Ordered list of 3D points with optional per-point unit normals.
 *
 * `normals` is either empty or exactly as long as `points`.
 */
struct PointCloud {
    std::vector<Point3> points;
    std::vector<Vec3> normals;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}
    PointCloud(std::vector<Point3> pts, std::vector<Vec3> nrm)
        : points(std::move(pts)), normals(std::move(nrm)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }

    /// Throws InvalidArgument when a coordinate is not finite, when the normal
    /// count mismatches, or when a normal is not unit length.
    void validate() const;
};

/// Plane through `anchor` with unit `normal`.
struct Plane {
    Point3 anchor = Point3::Zero();
    Vec3 normal = Vec3::UnitX();

    /// Normalizes `normal`; throws InvalidArgument on a zero vector.
    static Plane from_point_normal(const Point3& anchor, const Vec3& normal);

    double signed_distance(const Point3& x) const { return (x - anchor).dot(normal); }
    Point3 project(const Point3& x) const { return x - signed_distance(x) * normal; }
};

/// x -> rotation * x + translation, rotation orthonormal with det +1.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Point3 operator()(const Point3& x) const { return rotation * x + translation; }

    /// (*this ∘ inner)(x) = (*this)(inner(x)).
    RigidTransform compose(const RigidTransform& inner) const {
        return {rotation * inner.rotation, rotation * inner.translation + translation};
    }

    RigidTransform inverse() const {
        const Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    /// RᵀR = I and det R = +1, both within `tolerance`.
    bool is_valid(double tolerance = 1e-6) const;
};

/// Axis-aligned box; min_corner <= max_corner componentwise.
struct BoundingBox {
    Point3 min_corner = Point3::Zero();
    Point3 max_corner = Point3::Zero();

    Vec3 extent() const { return max_corner - min_corner; }
    double diagonal() const { return extent().norm(); }
    bool contains(const Point3& x, double slack = 0.0) const;
};

BoundingBox bounding_box(const PointCloud& cloud);

/// Midpoint of the box; this is the reference point for symmetry candidates.
Point3 bbox_centroid(const BoundingBox& box);

/// Arithmetic mean of the points.
Point3 mass_center(const PointCloud& cloud);

/// Mirror image of a single point: x - 2<x - p, n> n.
Point3 reflect_point(const Point3& x, const Plane& plane);

/// Mirror image of the whole cloud. Normals are reflected as free vectors.
PointCloud reflect(const PointCloud& cloud, const Plane& plane);

/// Rotates and translates points; normals are only rotated.
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);

/// Concatenation, `first` followed by `second`. Normals are kept only when
/// both inputs carry them.
PointCloud concatenate(const PointCloud& first, const PointCloud& second);

/// Sub-cloud made of the given indices, in the given order.
PointCloud select(const PointCloud& cloud, const std::vector<std::size_t>& indices);

/// Uniformly distributed random rotation from three numbers in [0, 1).
Mat3 rotation_from_uniform(double u1, double u2, double u3);

}  // namespace symcomplete
