#include "symcomplete/metrics.hpp"

#include "symcomplete/error.hpp"

#include <algorithm>
#include <cmath>

namespace symcomplete {

void BalanceConfig::validate() const {
    if (!(cube_side > 0.0) || !std::isfinite(cube_side)) {
        throw InvalidArgument("balance cube side must be positive and finite");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw InvalidArgument("balance epsilon must lie in (0, 1)");
    }
}

BalanceConfig default_balance_config(double average_spacing) {
    return {kDefaultCubeSideFactor * average_spacing, kDefaultEpsilon};
}

bool balance_rule(std::size_t in_first, std::size_t in_second, double epsilon) {
    const std::size_t total = in_first + in_second;
    if (total == 0) {
        return false;
    }
    const auto diff = in_first > in_second ? in_first - in_second : in_second - in_first;
    return static_cast<double>(diff) <= epsilon * static_cast<double>(total);
}

BalanceCounts is_balanced(const Point3& x, const SpatialIndex& first, const SpatialIndex& second,
                          const BalanceConfig& cfg) {
    BalanceCounts c;
    c.in_first = first.cube_count(x, cfg.cube_side);
    c.in_second = second.cube_count(x, cfg.cube_side);
    c.balanced = balance_rule(c.in_first, c.in_second, cfg.epsilon);
    return c;
}

double balanced_distance(const PointCloud& first, const PointCloud& second, const BalanceConfig& cfg) {
    return balanced_distance(first, SpatialIndex(first), second, SpatialIndex(second), cfg);
}

double balanced_distance(const PointCloud& first, const SpatialIndex& first_index, const PointCloud& second,
                         const SpatialIndex& second_index, const BalanceConfig& cfg) {
    cfg.validate();
    if (first.empty() || second.empty()) {
        throw InvalidArgument("balanced distance needs non-empty clouds");
    }
    std::size_t balanced = 0;
    for (const auto* cloud : {&first, &second}) {
        for (const auto& x : cloud->points) {
            balanced += is_balanced(x, first_index, second_index, cfg).balanced ? 1 : 0;
        }
    }
    const double total = static_cast<double>(first.size() + second.size());
    return 1.0 - static_cast<double>(balanced) / total;
}

double directed_mean_distance(const PointCloud& from, const SpatialIndex& to) {
    double sum = 0.0;
    for (const auto& p : from.points) {
        sum += std::sqrt(to.nearest(p).distance_sq);
    }
    return sum / static_cast<double>(from.size());
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("chamfer distance: empty point cloud");
    }
    return chamfer_distance(a, SpatialIndex(a), b, SpatialIndex(b));
}

double chamfer_distance(const PointCloud& a, const SpatialIndex& a_index, const PointCloud& b,
                        const SpatialIndex& b_index) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("chamfer distance: empty point cloud");
    }
    return directed_mean_distance(a, b_index) + directed_mean_distance(b, a_index);
}

void SymmetryEvalConfig::validate() const {
    if (!(angle_threshold > 0.0) || !(center_threshold > 0.0)) {
        throw InvalidArgument("symmetry thresholds must be positive");
    }
}

SymmetryEvalConfig default_symmetry_eval(const BoundingBox& gt_bounds) {
    return {kDefaultAngleThreshold, kDefaultCenterFraction * gt_bounds.diagonal()};
}

namespace {

using Vec2 = Eigen::Vector2d;

/// Keeps the part of `poly` where a*s + b*t + c >= 0.
std::vector<Vec2> clip(const std::vector<Vec2>& poly, double a, double b, double c) {
    std::vector<Vec2> out;
    const auto n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double fp = a * p.x() + b * p.y() + c;
        const double fq = a * q.x() + b * q.y() + c;
        if (fp >= 0.0) {
            out.push_back(p);
        }
        if ((fp >= 0.0) != (fq >= 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

Vec2 closest_on_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return a + t * ab;
}

}  // namespace

Point3 project_onto_plane_patch(const Point3& x, const Plane& plane, const BoundingBox& box) {
    const Vec3 n = plane.normal.normalized();
    const Vec3 u = n.unitOrthogonal();
    const Vec3 v = n.cross(u);
    const Point3 origin = plane.project(bbox_centroid(box));
    const double half = 2.0 * (box.diagonal() + (origin - bbox_centroid(box)).norm()) + 1.0;
    std::vector<Vec2> poly{{-half, -half}, {half, -half}, {half, half}, {-half, half}};
    for (int a = 0; a < 3 && !poly.empty(); ++a) {
        // lo <= origin + s u + t v <= hi along axis a
        poly = clip(poly, u[a], v[a], origin[a] - box.min_corner[a]);
        if (!poly.empty()) {
            poly = clip(poly, -u[a], -v[a], box.max_corner[a] - origin[a]);
        }
    }
    const Point3 proj = plane.project(x);
    if (poly.empty()) {
        return proj;
    }
    const Vec2 q((proj - origin).dot(u), (proj - origin).dot(v));
    bool inside = poly.size() >= 3;
    for (std::size_t i = 0; i < poly.size() && inside; ++i) {
        const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
        const Vec2 w = q - poly[i];
        inside = e.x() * w.y() - e.y() * w.x() >= 0.0;
    }
    if (inside) {
        return proj;
    }
    Vec2 best = poly.front();
    double best_d = (q - best).squaredNorm();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 c = closest_on_segment(q, poly[i], poly[(i + 1) % poly.size()]);
        const double d = (q - c).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return origin + best.x() * u + best.y() * v;
}

bool symmetry_correct(const Plane& predicted, const Plane& truth, const BoundingBox& gt_bounds,
                      const SymmetryEvalConfig& cfg) {
    const double cosine = std::min(1.0, std::abs(predicted.normal.normalized().dot(truth.normal.normalized())));
    if (std::acos(cosine) > cfg.angle_threshold) {
        return false;
    }
    const Point3 closest = project_onto_plane_patch(predicted.anchor, truth, gt_bounds);
    return (predicted.anchor - closest).norm() <= cfg.center_threshold;
}

double accuracy(const std::vector<Plane>& predictions, const std::vector<SymmetryGroundTruth>& truths,
                const SymmetryEvalConfig& cfg) {
    if (predictions.size() != truths.size()) {
        throw InvalidArgument("accuracy: prediction and ground-truth lists differ in length");
    }
    if (predictions.empty()) {
        throw InvalidArgument("accuracy: no objects");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& gt = truths[i];
        const bool hit = std::any_of(gt.planes.begin(), gt.planes.end(), [&](const Plane& p) {
            return symmetry_correct(predictions[i], p, gt.bounds, cfg);
        });
        correct += hit ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace symcomplete
