#include "symcomplete/symmetry.hpp"

#include "symcomplete/convex_hull.hpp"
#include "symcomplete/error.hpp"
#include "symcomplete/spatial_index.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace symcomplete {

namespace {

constexpr double kRankTolerance = 1e-12;

std::vector<SymmetryCandidate> planes_from_pca(const PCAResult& pca, const Point3& center, CandidateSource source) {
    std::vector<SymmetryCandidate> out;
    for (const auto& axis : pca.eigenvectors) {
        out.push_back({Plane{center, axis}, 1.0, source});
    }
    return out;
}

}  // namespace

std::string_view to_string(CandidateSource source) {
    return source == CandidateSource::NormalsPCA ? "normals_pca" : "hull_pca";
}

PCAResult pca(const DirectionSet& dirs) {
    if (dirs.directions.size() < 3) {
        throw DegenerateInput("degenerate direction distribution: fewer than 3 directions");
    }
    Vec3 mean = Vec3::Zero();
    for (const auto& d : dirs.directions) {
        mean += d;
    }
    mean /= static_cast<double>(dirs.directions.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& d : dirs.directions) {
        const Vec3 c = d - mean;
        cov.noalias() += c * c.transpose();
    }
    cov /= static_cast<double>(dirs.directions.size());

    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    const Vec3 evals = solver.eigenvalues();  // ascending
    if (!(evals[2] > 0.0) || evals[1] <= kRankTolerance * evals[2]) {
        throw DegenerateInput("degenerate direction distribution");
    }
    PCAResult result;
    for (int i = 0; i < 3; ++i) {
        result.eigenvalues[i] = evals[2 - i];
        result.eigenvectors[i] = solver.eigenvectors().col(2 - i).normalized();
    }
    return result;
}

CandidateList normal_direction_candidates(const PointCloud& cloud, const Point3& center) {
    if (!cloud.has_normals()) {
        throw InvalidArgument("normal direction candidates need normals; estimate them first");
    }
    CandidateList out;
    try {
        const auto result = pca(DirectionSet{cloud.normals, DirectionSet::Provenance::Normals});
        out.candidates = planes_from_pca(result, center, CandidateSource::NormalsPCA);
    } catch (const DegenerateInput& e) {
        out.diagnostics.push_back(std::string("normals PCA: ") + e.what());
    }
    return out;
}

DirectionSet hull_edge_directions(const PointCloud& cloud) {
    const auto hull = convex_hull(cloud);
    DirectionSet set;
    set.provenance = DirectionSet::Provenance::HullEdges;
    set.directions.reserve(2 * hull.edges.size());
    for (const auto& [i, j] : hull.edges) {
        const Vec3 u = (cloud.points[j] - cloud.points[i]).normalized();
        set.directions.push_back(u);
        set.directions.push_back(-u);
    }
    return set;
}

CandidateList hull_direction_candidates(const PointCloud& cloud, const Point3& center) {
    if (cloud.size() < 4) {
        throw DegenerateInput("2D hull; hull candidates unavailable (fewer than 4 points)");
    }
    DirectionSet dirs;
    try {
        dirs = hull_edge_directions(cloud);
    } catch (const DegenerateInput& e) {
        throw DegenerateInput(std::string("2D hull; hull candidates unavailable: ") + e.what());
    }
    CandidateList out;
    out.candidates = planes_from_pca(pca(dirs), center, CandidateSource::HullPCA);
    return out;
}

void score_candidates(const PointCloud& cloud, std::vector<SymmetryCandidate>& candidates, const BalanceConfig& cfg) {
    cfg.validate();
    const SpatialIndex index(cloud);
    for (auto& c : candidates) {
        const PointCloud mirrored = reflect(PointCloud(cloud.points), c.plane);
        const SpatialIndex mirrored_index(mirrored);
        c.score = balanced_distance(cloud, index, mirrored, mirrored_index, cfg);
    }
}

SymmetryCandidate select_best_candidate(const PointCloud& cloud, std::vector<SymmetryCandidate>& candidates,
                                        const BalanceConfig& cfg) {
    if (candidates.empty()) {
        throw InvalidArgument("no symmetry candidates to select from");
    }
    score_candidates(cloud, candidates, cfg);
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].score < candidates[best].score) {
            best = i;
        }
    }
    return candidates[best];
}

SymmetryDetection detect_symmetry(const PointCloud& cloud_with_normals, const BalanceConfig& cfg) {
    const Point3 center = bbox_centroid(bounding_box(cloud_with_normals));
    SymmetryDetection out;
    auto normals = normal_direction_candidates(cloud_with_normals, center);
    out.candidates = std::move(normals.candidates);
    out.diagnostics = std::move(normals.diagnostics);
    try {
        auto hull = hull_direction_candidates(cloud_with_normals, center);
        out.candidates.insert(out.candidates.end(), hull.candidates.begin(), hull.candidates.end());
    } catch (const DegenerateInput& e) {
        out.diagnostics.push_back(std::string("hull PCA: ") + e.what());
    }
    if (out.candidates.empty()) {
        throw DegenerateInput("all symmetry candidates degenerate");
    }
    out.best = select_best_candidate(cloud_with_normals, out.candidates, cfg);
    return out;
}

}  // namespace symcomplete
