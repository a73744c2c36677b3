#pragma once

#include "symcomplete/geometry.hpp"
#include "symcomplete/metrics.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace symcomplete {

/// Unit directions registered on the sphere.
struct DirectionSet {
    enum class Provenance { Normals, HullEdges };

    std::vector<Vec3> directions;
    Provenance provenance = Provenance::Normals;
};

/// Eigen-decomposition of the direction covariance, eigenvalues descending.
struct PCAResult {
    std::array<double, 3> eigenvalues{};
    std::array<Vec3, 3> eigenvectors;
};

enum class CandidateSource { NormalsPCA, HullPCA };

std::string_view to_string(CandidateSource source);

struct SymmetryCandidate {
    Plane plane;
    /// Balanced distance of the cloud against its mirror image; lower is better.
    double score = 1.0;
    CandidateSource source = CandidateSource::NormalsPCA;
};

/// Throws DegenerateInput for fewer than three directions or a covariance of
/// rank <= 1 ("degenerate direction distribution").
PCAResult pca(const DirectionSet& dirs);

/// Candidates plus the reasons some generator produced none.
struct CandidateList {
    std::vector<SymmetryCandidate> candidates;
    std::vector<std::string> diagnostics;
};

/// Three planes through `center`, normal to the principal components of the
/// cloud's normals. Requires normals; an empty list comes back with a
/// diagnostic when the PCA degenerates.
CandidateList normal_direction_candidates(const PointCloud& cloud, const Point3& center);

/// Hull edge directions, both signs, one sample per edge.
DirectionSet hull_edge_directions(const PointCloud& cloud);

/// Three planes through `center`, normal to the principal components of the
/// hull edge directions. Throws DegenerateInput for flat clouds.
CandidateList hull_direction_candidates(const PointCloud& cloud, const Point3& center);

/// Fills in `score` for every candidate.
void score_candidates(const PointCloud& cloud, std::vector<SymmetryCandidate>& candidates,
                      const BalanceConfig& cfg);

/// Scores every candidate and returns the lowest-scoring one; ties go to the
/// earlier candidate.
SymmetryCandidate select_best_candidate(const PointCloud& cloud, std::vector<SymmetryCandidate>& candidates,
                                        const BalanceConfig& cfg);

struct SymmetryDetection {
    std::vector<SymmetryCandidate> candidates;  // scored; normals first, then hull
    SymmetryCandidate best;
    std::vector<std::string> diagnostics;
};

/// Both generators through the bounding-box centroid, then selection.
/// Throws DegenerateInput when no generator produces a candidate.
SymmetryDetection detect_symmetry(const PointCloud& cloud_with_normals, const BalanceConfig& cfg);

}  // namespace symcomplete
