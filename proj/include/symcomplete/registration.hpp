#pragma once

#include "symcomplete/error.hpp"
#include "symcomplete/geometry.hpp"
#include "symcomplete/normals.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace symcomplete {

inline constexpr std::size_t kFpfhBins = 33;

/// Three 11-bin histograms of the Darboux-frame angles (alpha, phi, theta).
struct FPFHFeature {
    std::array<double, kFpfhBins> histogram{};
};

struct FeatureSet {
    std::vector<FPFHFeature> features;
    /// Points with no neighbor inside the radius; their feature is zero.
    std::vector<std::size_t> isolated;
};

/// Pair feature (alpha, phi, theta, distance) of two oriented points.
std::array<double, 4> pair_feature(const Point3& p1, const Vec3& n1, const Point3& p2, const Vec3& n2);

/// Two-pass FPFH over the radius neighborhood (the point itself excluded).
FeatureSet compute_fpfh(const PointCloud& cloud, double radius);

/// One point per occupied voxel (grid anchored at the bounding-box minimum):
/// the centroid of its members, normals averaged and renormalized. Output is
/// ordered by voxel coordinate.
PointCloud downsample_voxel(const PointCloud& cloud, double voxel_size);

struct RegistrationParams {
    double voxel_size = 0.0;
    double fpfh_radius = 0.0;
    std::size_t ransac_iterations = 4'000'000;
    double ransac_confidence = 0.999;
    double ransac_distance_threshold = 0.0;
    std::size_t icp_max_iterations = 30;
    double icp_distance_threshold = 0.0;
    double icp_convergence_delta = 0.0;
    std::uint64_t seed = 0;
    OrientationReference orientation = Axis{};

    void validate() const;
};

/// Scale-derived defaults from the average nearest-neighbor spacing `s`:
/// voxel 2.5 s, FPFH radius 5 voxels, RANSAC threshold 1.5 voxels, ICP
/// threshold 1.5 voxels, ICP convergence 1e-8 s^2.
RegistrationParams default_registration_params(double average_spacing, std::uint64_t seed = 0);

struct RegistrationResult {
    RigidTransform transform;
    double fitness = 0.0;      // inlier fraction of the source
    double inlier_rmse = 0.0;
    std::size_t iterations = 0;
};

/// Least-squares rigid fit (SVD) mapping `source[i]` onto `target[i]`.
RigidTransform fit_rigid(const std::vector<Point3>& source, const std::vector<Point3>& target);

/// Inlier fraction and RMSE of `transform(source)` against `target`.
RegistrationResult evaluate_registration(const PointCloud& source, const PointCloud& target,
                                         const RigidTransform& transform, double distance_threshold);

/// RANSAC over nearest-feature correspondences. Throws RegistrationFailure
/// when fewer than three correspondences exist.
RegistrationResult ransac_registration(const PointCloud& source, const PointCloud& target,
                                       const FeatureSet& source_features, const FeatureSet& target_features,
                                       const RegistrationParams& params);

/// FPFH (radius `params.fpfh_radius`) followed by RANSAC. Both clouds need
/// oriented normals.
RegistrationResult global_registration(const PointCloud& source, const PointCloud& target,
                                       const RegistrationParams& params);

/// One ICP iteration as seen by an observer: the correspondence set at the
/// start of the iteration and the closed-form fit computed from it.
struct IcpStep {
    std::size_t iteration = 0;
    std::vector<Point3> source;  // already moved by the current estimate
    std::vector<Point3> target;
    RigidTransform increment;
    double error_before = 0.0;
    double error_after = 0.0;
    bool accepted = false;
};

using IcpObserver = std::function<void(const IcpStep&)>;

/**
 * Point-to-point ICP. Correspondences are nearest neighbors within
 * `params.icp_distance_threshold`; each step is the closed-form rigid fit.
 * A step is only accepted when the mean squared error over correspondences
 * does not increase, so the recorded error sequence is non-increasing.
 */
RegistrationResult icp_refine(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
                              const RegistrationParams& params, const IcpObserver& observer = {});

class RegistrationFailure : public Error {
public:
    using Error::Error;
};

struct PlaneRefinement {
    Plane plane;
    RegistrationResult registration;  // maps the mirrored cloud onto the input
    RegistrationResult global;        // RANSAC stage alone
    /// Linear part and offset of registration ∘ initial reflection.
    Mat3 composite_linear = Mat3::Identity();
    Vec3 composite_offset = Vec3::Zero();
    bool used_global_initialization = false;
};

/// Closest pure reflection to the improper isometry x -> linear x + offset,
/// expressed as a plane; `anchor_hint` is projected onto it. Throws
/// RegistrationFailure when the map is not reflection-like (symmetric-part
/// eigenvalues further than `tolerance` from {-1, 1, 1}).
Plane plane_from_improper_isometry(const Mat3& linear, const Vec3& offset, const Point3& anchor_hint,
                                   double tolerance = 0.1);

/**
 * Registers the mirror image of `cloud` (about `initial`) back onto `cloud`
 * and reads the refined plane off the composite map. `cloud` needs oriented
 * normals.
 */
PlaneRefinement refine_symmetry_plane(const PointCloud& cloud, const Plane& initial, const RegistrationParams& params);

}  // namespace symcomplete
