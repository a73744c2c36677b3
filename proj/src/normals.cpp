#include "symcomplete/normals.hpp"

#include "symcomplete/error.hpp"
#include "symcomplete/spatial_index.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace symcomplete {

void NormalParams::validate() const {
    if (neighbor_count < 3) {
        throw InvalidArgument("normal estimation needs k >= 3");
    }
    if (const auto* axis = std::get_if<Axis>(&orientation)) {
        if (std::abs(axis->direction.norm() - 1.0) > kPlaneNormalTolerance) {
            throw InvalidArgument("orientation axis must be unit length");
        }
    }
}

std::size_t NormalEstimate::count(NormalQuality q) const {
    return static_cast<std::size_t>(std::count(quality.begin(), quality.end(), q));
}

namespace {

constexpr double kEigenTieTolerance = 1e-9;

/// Lexicographically largest unit vector orthogonal to `dominant`.
Vec3 lexicographic_orthogonal(const Vec3& dominant) {
    for (int a = 0; a < 3; ++a) {
        Vec3 v = Vec3::Unit(a) - dominant[a] * dominant;
        const double len = v.norm();
        if (len > 1e-12) {
            return v / len;
        }
    }
    return Vec3::UnitZ();
}

bool flip_needed(const Point3& x, const Vec3& n, const OrientationReference& reference) {
    return std::visit(
        [&](const auto& ref) {
            using T = std::decay_t<decltype(ref)>;
            if constexpr (std::is_same_v<T, Viewpoint>) {
                return n.dot(ref.position - x) < 0.0;
            } else {
                return n.dot(ref.direction) < 0.0;
            }
        },
        reference);
}

}  // namespace

Vec3 fit_normal(const std::vector<Point3>& neighborhood, NormalQuality* quality) {
    auto set_quality = [&](NormalQuality q) {
        if (quality) {
            *quality = q;
        }
    };
    if (neighborhood.empty()) {
        set_quality(NormalQuality::Degenerate);
        return Vec3::UnitZ();
    }
    Point3 mean = Point3::Zero();
    for (const auto& p : neighborhood) {
        mean += p;
    }
    mean /= static_cast<double>(neighborhood.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : neighborhood) {
        const Vec3 d = p - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(neighborhood.size());

    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    const Vec3 evals = solver.eigenvalues();  // ascending
    if (!(evals[2] > 0.0)) {
        set_quality(NormalQuality::Degenerate);
        return Vec3::UnitZ();
    }
    const double scale = evals[2];
    const bool smallest_tie = evals[1] - evals[0] <= kEigenTieTolerance * scale;
    const bool dominant_tie = evals[2] - evals[1] <= kEigenTieTolerance * scale;
    if (smallest_tie) {
        set_quality(NormalQuality::LowConfidence);
        if (!dominant_tie) {
            return lexicographic_orthogonal(solver.eigenvectors().col(2).normalized());
        }
    } else {
        set_quality(NormalQuality::Ok);
    }
    return solver.eigenvectors().col(0).normalized();
}

NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params) {
    params.validate();
    if (cloud.size() <= params.neighbor_count) {
        throw InvalidArgument("normal estimation needs more than k = " + std::to_string(params.neighbor_count) +
                              " points, got " + std::to_string(cloud.size()));
    }
    const SpatialIndex index(cloud);
    NormalEstimate out;
    out.cloud.points = cloud.points;
    out.cloud.normals.resize(cloud.size());
    out.quality.resize(cloud.size(), NormalQuality::Ok);
    std::vector<Point3> hood;
    hood.reserve(params.neighbor_count);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        hood.clear();
        for (const auto& n : index.knn(cloud.points[i], params.neighbor_count)) {
            hood.push_back(cloud.points[n.index]);
        }
        Vec3 n = fit_normal(hood, &out.quality[i]);
        if (flip_needed(cloud.points[i], n, params.orientation)) {
            n = -n;
        }
        out.cloud.normals[i] = n;
    }
    return out;
}

PointCloud orient_normals(const PointCloud& cloud, const OrientationReference& reference) {
    if (!cloud.has_normals()) {
        throw InvalidArgument("orient_normals: cloud has no normals");
    }
    PointCloud out = cloud;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (flip_needed(out.points[i], out.normals[i], reference)) {
            out.normals[i] = -out.normals[i];
        }
    }
    return out;
}

}  // namespace symcomplete
