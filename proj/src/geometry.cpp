#include "symcomplete/geometry.hpp"

#include "symcomplete/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace symcomplete {

void PointCloud::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) {
            throw InvalidArgument("point " + std::to_string(i) + " has a non-finite coordinate");
        }
    }
    if (normals.empty()) {
        return;
    }
    if (normals.size() != points.size()) {
        throw InvalidArgument("normal count " + std::to_string(normals.size()) +
                              " does not match point count " + std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
        if (!normals[i].allFinite() || std::abs(normals[i].norm() - 1.0) > kCloudNormalTolerance) {
            throw InvalidArgument("normal " + std::to_string(i) + " is not unit length");
        }
    }
}

Plane Plane::from_point_normal(const Point3& anchor, const Vec3& normal) {
    const double len = normal.norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
        throw InvalidArgument("plane normal must be a non-zero finite vector");
    }
    return {anchor, normal / len};
}

bool RigidTransform::is_valid(double tolerance) const {
    if (!rotation.allFinite() || !translation.allFinite()) {
        return false;
    }
    const double orth = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return orth <= tolerance && std::abs(rotation.determinant() - 1.0) <= tolerance;
}

bool BoundingBox::contains(const Point3& x, double slack) const {
    return (x.array() >= min_corner.array() - slack).all() &&
           (x.array() <= max_corner.array() + slack).all();
}

BoundingBox bounding_box(const PointCloud& cloud) {
    if (cloud.empty()) {
        throw InvalidArgument("empty point cloud");
    }
    BoundingBox box{cloud.points.front(), cloud.points.front()};
    for (const auto& p : cloud.points) {
        box.min_corner = box.min_corner.cwiseMin(p);
        box.max_corner = box.max_corner.cwiseMax(p);
    }
    return box;
}

Point3 bbox_centroid(const BoundingBox& box) {
    return 0.5 * (box.max_corner + box.min_corner);
}

Point3 mass_center(const PointCloud& cloud) {
    if (cloud.empty()) {
        throw InvalidArgument("empty point cloud");
    }
    Point3 sum = Point3::Zero();
    for (const auto& p : cloud.points) {
        sum += p;
    }
    return sum / static_cast<double>(cloud.size());
}

namespace {

void require_unit(const Plane& plane) {
    if (!plane.normal.allFinite() || std::abs(plane.normal.norm() - 1.0) > kPlaneNormalTolerance) {
        throw InvalidArgument("plane normal is not unit length");
    }
}

}  // namespace

Point3 reflect_point(const Point3& x, const Plane& plane) {
    return x - 2.0 * (x - plane.anchor).dot(plane.normal) * plane.normal;
}

PointCloud reflect(const PointCloud& cloud, const Plane& plane) {
    require_unit(plane);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        out.points.push_back(reflect_point(p, plane));
    }
    out.normals.reserve(cloud.normals.size());
    for (const auto& n : cloud.normals) {
        out.normals.push_back(n - 2.0 * n.dot(plane.normal) * plane.normal);
    }
    return out;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        out.points.push_back(transform(p));
    }
    out.normals.reserve(cloud.normals.size());
    for (const auto& n : cloud.normals) {
        out.normals.push_back(transform.rotation * n);
    }
    return out;
}

PointCloud concatenate(const PointCloud& first, const PointCloud& second) {
    PointCloud out;
    out.points.reserve(first.size() + second.size());
    out.points.insert(out.points.end(), first.points.begin(), first.points.end());
    out.points.insert(out.points.end(), second.points.begin(), second.points.end());
    const bool both = (first.has_normals() || first.empty()) && (second.has_normals() || second.empty()) &&
                      (first.has_normals() || second.has_normals());
    if (both) {
        out.normals.reserve(out.points.size());
        out.normals.insert(out.normals.end(), first.normals.begin(), first.normals.end());
        out.normals.insert(out.normals.end(), second.normals.begin(), second.normals.end());
    }
    return out;
}

PointCloud select(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
    PointCloud out;
    out.points.reserve(indices.size());
    for (auto i : indices) {
        out.points.push_back(cloud.points.at(i));
    }
    if (cloud.has_normals()) {
        out.normals.reserve(indices.size());
        for (auto i : indices) {
            out.normals.push_back(cloud.normals.at(i));
        }
    }
    return out;
}

Mat3 rotation_from_uniform(double u1, double u2, double u3) {
    // Shoemake's uniform quaternion.
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2;
    const double t3 = 2.0 * std::numbers::pi * u3;
    Eigen::Quaterniond q(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));
    return q.normalized().toRotationMatrix();
}

}  // namespace symcomplete
