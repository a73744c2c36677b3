#include "symcomplete/registration.hpp"

#include "symcomplete/spatial_index.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

namespace symcomplete {

void RegistrationParams::validate() const {
    const bool ok = voxel_size > 0.0 && fpfh_radius > 0.0 && ransac_iterations > 0 && ransac_confidence > 0.0 &&
                    ransac_confidence < 1.0 && ransac_distance_threshold > 0.0 && icp_max_iterations > 0 &&
                    icp_distance_threshold > 0.0 && icp_convergence_delta > 0.0;
    if (!ok) {
        throw InvalidArgument("registration parameters must all be positive (confidence in (0, 1))");
    }
}

RegistrationParams default_registration_params(double average_spacing, std::uint64_t seed) {
    RegistrationParams p;
    p.voxel_size = 2.5 * average_spacing;
    p.fpfh_radius = 5.0 * p.voxel_size;
    p.ransac_distance_threshold = 1.5 * p.voxel_size;
    p.icp_distance_threshold = 1.5 * p.voxel_size;
    p.icp_convergence_delta = 1e-8 * average_spacing * average_spacing;
    p.seed = seed;
    return p;
}

// ---------------------------------------------------------------- FPFH

std::array<double, 4> pair_feature(const Point3& p1, const Vec3& n1, const Point3& p2, const Vec3& n2) {
    Vec3 dp = p2 - p1;
    const double dist = dp.norm();
    if (dist == 0.0) {
        return {0.0, 0.0, 0.0, 0.0};
    }
    Vec3 source_n = n1;
    Vec3 target_n = n2;
    const double angle1 = n1.dot(dp) / dist;
    const double angle2 = n2.dot(dp) / dist;
    double theta = angle1;
    // The point whose normal makes the smaller angle with the line is the source.
    if (std::acos(std::abs(angle1)) > std::acos(std::abs(angle2))) {
        source_n = n2;
        target_n = n1;
        dp = -dp;
        theta = -angle2;
    }
    Vec3 v = dp.cross(source_n);
    const double vn = v.norm();
    if (vn == 0.0) {
        return {0.0, 0.0, 0.0, 0.0};
    }
    v /= vn;
    const Vec3 w = source_n.cross(v);
    const double phi = v.dot(target_n);
    const double alpha = std::atan2(w.dot(target_n), source_n.dot(target_n));
    return {alpha, phi, theta, dist};
}

namespace {

int bin_of(double value, double lo, double hi) {
    const int b = static_cast<int>(std::floor(11.0 * (value - lo) / (hi - lo)));
    return std::clamp(b, 0, 10);
}

void add_pair(FPFHFeature& f, const std::array<double, 4>& pf, double increment) {
    f.histogram[bin_of(pf[0], -std::numbers::pi, std::numbers::pi)] += increment;
    f.histogram[11 + bin_of(pf[1], -1.0, 1.0)] += increment;
    f.histogram[22 + bin_of(pf[2], -1.0, 1.0)] += increment;
}

}  // namespace

FeatureSet compute_fpfh(const PointCloud& cloud, double radius) {
    if (!cloud.has_normals()) {
        throw InvalidArgument("FPFH needs normals");
    }
    if (!(radius > 0.0)) {
        throw InvalidArgument("FPFH radius must be positive");
    }
    const SpatialIndex index(cloud);
    const std::size_t n = cloud.size();
    std::vector<std::vector<Neighbor>> hoods(n);
    std::vector<FPFHFeature> spfh(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto hood = index.radius(cloud.points[i], radius);
        std::erase_if(hood, [i](const Neighbor& nb) { return nb.index == i; });
        hoods[i] = std::move(hood);
        if (hoods[i].empty()) {
            continue;
        }
        const double inc = 100.0 / static_cast<double>(hoods[i].size());
        for (const auto& nb : hoods[i]) {
            add_pair(spfh[i],
                     pair_feature(cloud.points[i], cloud.normals[i], cloud.points[nb.index], cloud.normals[nb.index]),
                     inc);
        }
    }

    FeatureSet out;
    out.features.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (hoods[i].empty()) {
            out.isolated.push_back(i);
            continue;
        }
        auto& f = out.features[i].histogram;
        std::array<double, 3> sums{};
        for (const auto& nb : hoods[i]) {
            if (nb.distance_sq == 0.0) {
                continue;
            }
            for (std::size_t b = 0; b < kFpfhBins; ++b) {
                const double val = spfh[nb.index].histogram[b] / nb.distance_sq;
                sums[b / 11] += val;
                f[b] += val;
            }
        }
        for (auto& s : sums) {
            s = s != 0.0 ? 100.0 / s : 0.0;
        }
        for (std::size_t b = 0; b < kFpfhBins; ++b) {
            f[b] = f[b] * sums[b / 11] + spfh[i].histogram[b];
        }
    }
    return out;
}

// ---------------------------------------------------------------- voxels

PointCloud downsample_voxel(const PointCloud& cloud, double voxel_size) {
    if (!(voxel_size > 0.0)) {
        throw InvalidArgument("voxel size must be positive");
    }
    if (cloud.empty()) {
        return {};
    }
    const Point3 origin = bounding_box(cloud).min_corner;
    struct Cell {
        Point3 sum = Point3::Zero();
        Vec3 normal_sum = Vec3::Zero();
        Vec3 first_normal = Vec3::UnitZ();
        std::size_t count = 0;
    };
    std::map<std::array<std::int64_t, 3>, Cell> cells;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 rel = (cloud.points[i] - origin) / voxel_size;
        const std::array<std::int64_t, 3> key{static_cast<std::int64_t>(std::floor(rel.x())),
                                              static_cast<std::int64_t>(std::floor(rel.y())),
                                              static_cast<std::int64_t>(std::floor(rel.z()))};
        Cell& c = cells[key];
        c.sum += cloud.points[i];
        if (cloud.has_normals()) {
            if (c.count == 0) {
                c.first_normal = cloud.normals[i];
            }
            c.normal_sum += cloud.normals[i];
        }
        ++c.count;
    }
    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& [key, c] : cells) {
        out.points.push_back(c.sum / static_cast<double>(c.count));
        if (cloud.has_normals()) {
            const double len = c.normal_sum.norm();
            out.normals.push_back(len > 1e-12 ? Vec3(c.normal_sum / len) : c.first_normal);
        }
    }
    return out;
}

// ---------------------------------------------------------------- rigid fits

RigidTransform fit_rigid(const std::vector<Point3>& source, const std::vector<Point3>& target) {
    if (source.size() != target.size() || source.empty()) {
        throw InvalidArgument("rigid fit needs equally sized, non-empty correspondence lists");
    }
    const double n = static_cast<double>(source.size());
    Point3 cs = Point3::Zero();
    Point3 ct = Point3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        cs += source[i];
        ct += target[i];
    }
    cs /= n;
    ct /= n;
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        h.noalias() += (source[i] - cs) * (target[i] - ct).transpose();
    }
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    RigidTransform t;
    t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    t.translation = ct - t.rotation * cs;
    return t;
}

namespace {

RegistrationResult evaluate(const PointCloud& source, const SpatialIndex& target, const RigidTransform& transform,
                            double threshold) {
    RegistrationResult r;
    r.transform = transform;
    const double t2 = threshold * threshold;
    std::size_t inliers = 0;
    double sq = 0.0;
    for (const auto& p : source.points) {
        const auto nb = target.nearest(transform(p));
        if (nb.distance_sq <= t2) {
            ++inliers;
            sq += nb.distance_sq;
        }
    }
    r.fitness = source.empty() ? 0.0 : static_cast<double>(inliers) / static_cast<double>(source.size());
    r.inlier_rmse = inliers > 0 ? std::sqrt(sq / static_cast<double>(inliers)) : 0.0;
    return r;
}

/// Share of feature matches within `threshold` after `transform`.
RegistrationResult evaluate_matches(const PointCloud& source, const PointCloud& target,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& matches,
                                    const RigidTransform& transform, double threshold) {
    RegistrationResult r;
    r.transform = transform;
    const double t2 = threshold * threshold;
    std::size_t inliers = 0;
    double sq = 0.0;
    for (const auto& [i, j] : matches) {
        const double d2 = (transform(source.points[i]) - target.points[j]).squaredNorm();
        if (d2 <= t2) {
            ++inliers;
            sq += d2;
        }
    }
    r.fitness = matches.empty() ? 0.0 : static_cast<double>(inliers) / static_cast<double>(matches.size());
    r.inlier_rmse = inliers > 0 ? std::sqrt(sq / static_cast<double>(inliers)) : 0.0;
    return r;
}

bool better(const RegistrationResult& a, const RegistrationResult& b) {
    return a.fitness > b.fitness || (a.fitness == b.fitness && a.inlier_rmse < b.inlier_rmse);
}

/// Nearest target feature for each source feature (brute force, lowest index on ties).
std::vector<std::pair<std::size_t, std::size_t>> match_features(const FeatureSet& source, const FeatureSet& target) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (target.features.empty()) {
        return out;
    }
    std::vector<bool> target_isolated(target.features.size(), false);
    for (auto i : target.isolated) target_isolated[i] = true;
    std::vector<bool> source_isolated(source.features.size(), false);
    for (auto i : source.isolated) source_isolated[i] = true;

    using Row = Eigen::Matrix<double, 1, static_cast<int>(kFpfhBins)>;
    std::vector<Row> rows(target.features.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        rows[j] = Eigen::Map<const Row>(target.features[j].histogram.data());
    }
    for (std::size_t i = 0; i < source.features.size(); ++i) {
        if (source_isolated[i]) continue;
        const Row q = Eigen::Map<const Row>(source.features[i].histogram.data());
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        bool found = false;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (target_isolated[j]) continue;
            const double d = (rows[j] - q).squaredNorm();
            if (d < best) {
                best = d;
                best_j = j;
                found = true;
            }
        }
        if (found) out.emplace_back(i, best_j);
    }
    return out;
}

}  // namespace

RegistrationResult evaluate_registration(const PointCloud& source, const PointCloud& target,
                                         const RigidTransform& transform, double distance_threshold) {
    if (target.empty()) {
        throw InvalidArgument("evaluation target is empty");
    }
    return evaluate(source, SpatialIndex(target), transform, distance_threshold);
}

RegistrationResult ransac_registration(const PointCloud& source, const PointCloud& target,
                                       const FeatureSet& source_features, const FeatureSet& target_features,
                                       const RegistrationParams& params) {
    params.validate();
    if (source_features.features.size() != source.size() || target_features.features.size() != target.size()) {
        throw InvalidArgument("feature count does not match point count");
    }
    const auto matches = match_features(source_features, target_features);
    if (matches.size() < 3) {
        throw RegistrationFailure("insufficient feature matches");
    }
    const SpatialIndex target_index(target);
    const double thr = params.ransac_distance_threshold;
    constexpr double kEdgeSimilarity = 0.9;

    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick(0, matches.size() - 1);
    RegistrationResult best;
    best.fitness = -1.0;
    double budget = static_cast<double>(params.ransac_iterations);
    const double log_fail = std::log(1.0 - params.ransac_confidence);

    std::vector<Point3> src(3), dst(3);
    std::size_t it = 0;
    for (; it < params.ransac_iterations && static_cast<double>(it) < budget; ++it) {
        std::array<std::size_t, 3> s{};
        s[0] = pick(rng);
        do { s[1] = pick(rng); } while (s[1] == s[0] && matches.size() > 1);
        do { s[2] = pick(rng); } while ((s[2] == s[0] || s[2] == s[1]) && matches.size() > 2);
        for (int k = 0; k < 3; ++k) {
            src[k] = source.points[matches[s[k]].first];
            dst[k] = target.points[matches[s[k]].second];
        }
        bool compatible = true;
        for (int a = 0; a < 3 && compatible; ++a) {
            for (int b = a + 1; b < 3 && compatible; ++b) {
                const double ls = (src[a] - src[b]).norm();
                const double ld = (dst[a] - dst[b]).norm();
                compatible = ls >= kEdgeSimilarity * ld && ld >= kEdgeSimilarity * ls;
            }
        }
        if (!compatible) continue;
        const RigidTransform t = fit_rigid(src, dst);
        bool close = true;
        for (int k = 0; k < 3 && close; ++k) {
            close = (t(src[k]) - dst[k]).norm() <= thr;
        }
        if (!close) continue;
        // Hypotheses are ranked by the share of feature matches they explain;
        // the same share drives the early-exit budget.
        const auto r = evaluate_matches(source, target, matches, t, thr);
        if (better(r, best)) {
            best = r;
            if (best.fitness >= 1.0) {
                budget = static_cast<double>(it + 1);
            } else if (best.fitness > 0.0) {
                const double p3 = best.fitness * best.fitness * best.fitness;
                budget = std::min(budget, std::ceil(log_fail / std::log(1.0 - p3)));
            }
        }
    }
    if (best.fitness < 0.0) {
        best = evaluate(source, target_index, RigidTransform::identity(), thr);
        best.fitness = 0.0;
        best.iterations = it;
        return best;
    }

    // Polish with every feature correspondence the winning hypothesis explains,
    // then report point-based fitness.
    std::vector<Point3> in_src, in_dst;
    for (const auto& [i, j] : matches) {
        if ((best.transform(source.points[i]) - target.points[j]).norm() <= thr) {
            in_src.push_back(source.points[i]);
            in_dst.push_back(target.points[j]);
        }
    }
    RegistrationResult out = evaluate(source, target_index, best.transform, thr);
    if (in_src.size() >= 3) {
        const auto polished = evaluate(source, target_index, fit_rigid(in_src, in_dst), thr);
        if (better(polished, out)) {
            out = polished;
        }
    }
    out.iterations = it;
    return out;
}

RegistrationResult global_registration(const PointCloud& source, const PointCloud& target,
                                       const RegistrationParams& params) {
    params.validate();
    const auto fs = compute_fpfh(source, params.fpfh_radius);
    const auto ft = compute_fpfh(target, params.fpfh_radius);
    return ransac_registration(source, target, fs, ft, params);
}

// ---------------------------------------------------------------- ICP

namespace {

struct Correspondences {
    std::vector<Point3> source;
    std::vector<Point3> target;
    double mean_sq = 0.0;
};

Correspondences correspond(const PointCloud& source, const SpatialIndex& target, const RigidTransform& t,
                           double threshold) {
    Correspondences c;
    const double t2 = threshold * threshold;
    double sq = 0.0;
    for (const auto& p : source.points) {
        const Point3 moved = t(p);
        const auto nb = target.nearest(moved);
        if (nb.distance_sq <= t2) {
            c.source.push_back(moved);
            c.target.push_back(target.point(nb.index));
            sq += nb.distance_sq;
        }
    }
    c.mean_sq = c.source.empty() ? 0.0 : sq / static_cast<double>(c.source.size());
    return c;
}

}  // namespace

RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                              const RegistrationParams& params, const IcpObserver& observer) {
    params.validate();
    if (source.empty() || target.empty()) {
        throw InvalidArgument("ICP needs non-empty clouds");
    }
    const SpatialIndex target_index(target);
    const double thr = params.icp_distance_threshold;
    RegistrationResult result;
    result.transform = init;

    auto current = correspond(source, target_index, init, thr);
    if (current.source.empty()) {
        result.fitness = 0.0;
        return result;
    }
    std::size_t it = 0;
    while (it < params.icp_max_iterations) {
        ++it;
        const RigidTransform increment = fit_rigid(current.source, current.target);
        const RigidTransform candidate = increment.compose(result.transform);
        auto next = correspond(source, target_index, candidate, thr);
        const bool accepted = !next.source.empty() && next.mean_sq <= current.mean_sq;
        if (observer) {
            IcpStep step;
            step.iteration = it;
            step.source = current.source;
            step.target = current.target;
            step.increment = increment;
            step.error_before = current.mean_sq;
            step.error_after = accepted ? next.mean_sq : current.mean_sq;
            step.accepted = accepted;
            observer(step);
        }
        if (!accepted) {
            break;
        }
        const double drop = current.mean_sq - next.mean_sq;
        result.transform = candidate;
        current = std::move(next);
        if (drop < params.icp_convergence_delta) {
            break;
        }
    }
    result.iterations = it;
    result.fitness = static_cast<double>(current.source.size()) / static_cast<double>(source.size());
    result.inlier_rmse = std::sqrt(current.mean_sq);
    return result;
}

// ---------------------------------------------------------------- plane refinement

Plane plane_from_improper_isometry(const Mat3& linear, const Vec3& offset, const Point3& anchor_hint,
                                   double tolerance) {
    // The nearest reflection I - 2 m mᵀ (Frobenius) has m = eigenvector of the
    // symmetric part with the smallest eigenvalue.
    const Mat3 sym = 0.5 * (linear + linear.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> solver(sym);
    const Vec3 ev = solver.eigenvalues();
    if (std::abs(ev[0] + 1.0) > tolerance || std::abs(ev[1] - 1.0) > tolerance || std::abs(ev[2] - 1.0) > tolerance) {
        throw RegistrationFailure("registration destroyed reflection structure");
    }
    const Vec3 n = solver.eigenvectors().col(0).normalized();
    // A reflection about {x : <x, n> = c} is x -> H x + 2 c n.
    const double level = 0.5 * offset.dot(n);
    return Plane{anchor_hint - (anchor_hint.dot(n) - level) * n, n};
}

PlaneRefinement refine_symmetry_plane(const PointCloud& cloud, const Plane& initial, const RegistrationParams& params) {
    params.validate();
    if (!cloud.has_normals()) {
        throw InvalidArgument("plane refinement needs normals");
    }
    const PointCloud mirrored = orient_normals(reflect(cloud, initial), params.orientation);

    PlaneRefinement out;
    RegistrationResult from_identity = icp_refine(mirrored, cloud, RigidTransform::identity(), params);
    RegistrationResult chosen = from_identity;
    try {
        const PointCloud src_down = orient_normals(downsample_voxel(mirrored, params.voxel_size), params.orientation);
        const PointCloud dst_down = orient_normals(downsample_voxel(cloud, params.voxel_size), params.orientation);
        out.global = global_registration(src_down, dst_down, params);
        const RegistrationResult from_global = icp_refine(mirrored, cloud, out.global.transform, params);
        const double gain = from_global.fitness - from_identity.fitness;
        const bool take_global =
            gain > 0.01 || (std::abs(gain) <= 0.01 && from_global.inlier_rmse < 0.95 * from_identity.inlier_rmse);
        if (take_global) {
            chosen = from_global;
            out.used_global_initialization = true;
        }
    } catch (const RegistrationFailure&) {
        // Feature matching failed; the identity-initialized ICP stands.
    }
    out.registration = chosen;

    const Mat3 h = Mat3::Identity() - 2.0 * initial.normal * initial.normal.transpose();
    const Vec3 reflect_offset = 2.0 * initial.anchor.dot(initial.normal) * initial.normal;
    out.composite_linear = chosen.transform.rotation * h;
    out.composite_offset = chosen.transform.rotation * reflect_offset + chosen.transform.translation;

    Plane refined = plane_from_improper_isometry(out.composite_linear, out.composite_offset, initial.anchor);
    if (refined.normal.dot(initial.normal) < 0.0) {
        refined.normal = -refined.normal;
    }
    out.plane = refined;
    return out;
}

}  // namespace symcomplete
