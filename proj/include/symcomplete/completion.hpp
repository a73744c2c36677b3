#pragma once

#include "symcomplete/geometry.hpp"
#include "symcomplete/metrics.hpp"
#include "symcomplete/normals.hpp"
#include "symcomplete/registration.hpp"
#include "symcomplete/symmetry.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace symcomplete {

inline constexpr std::size_t kMinimumCompletionSize = 100;
inline constexpr double kDefaultSkipThreshold = 3.0;

/**
 * Pipeline configuration. Scale-dependent fields left at 0 (the balance
 * cube side and the registration distances) are derived from the input's
 * average nearest-neighbor spacing when the pipeline runs.
 */
struct CompletionConfig {
    BalanceConfig balance{0.0, kDefaultEpsilon};
    RegistrationParams registration{};
    NormalParams normal_params{};
    /// Completion is kept while CD(P, P*) / s <= skip_threshold.
    double skip_threshold = kDefaultSkipThreshold;
    std::uint64_t seed = 0;
    /// Number of detect-and-fill passes against the refined plane.
    std::size_t passes = 1;

    /// One "field: reason" message per invalid field; empty when valid.
    std::vector<std::string> problems() const;
    /// Throws InvalidArgument listing every problem.
    void validate() const;
};

/// Fills the scale-derived fields for a cloud with spacing `average_spacing`.
CompletionConfig resolve_config(const CompletionConfig& cfg, double average_spacing);

struct CompletionDiagnostics {
    std::vector<SymmetryCandidate> candidates;
    SymmetryCandidate best_candidate;
    Plane initial_plane;
    RegistrationResult registration;
    RegistrationResult global_registration;
    /// True when the refined plane replaced the best candidate.
    bool plane_refined = false;
    /// Balanced distance of the refined plane (NaN when refinement failed).
    double refined_score = std::numeric_limits<double>::quiet_NaN();
    double average_spacing = 0.0;
    double cube_side = 0.0;
    /// CD(P, P*) / s of the raw completion (before the skip decision).
    double scaled_chamfer = 0.0;
    std::size_t raw_added = 0;
    std::size_t passes_run = 0;
    /// Fallbacks taken and generator failures, in order.
    std::vector<std::string> notes;
};

struct CompletionResult {
    PointCloud completed;
    PointCloud added_points;
    Plane plane;
    bool skipped = false;
    std::string skip_reason;
    CompletionDiagnostics diagnostics;
};

struct PlaneEstimate {
    /// Input with oriented normals (estimated when the input had none).
    PointCloud with_normals;
    SymmetryDetection detection;
    Plane plane;
    RegistrationResult registration;
    RegistrationResult global_registration;
    bool plane_refined = false;
    double refined_score = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> notes;
};

/**
 * Normals, candidates and best-by-balance selection; with `refine`, the
 * mirror registration as well. The refined plane replaces the best candidate
 * only when its balanced distance is not worse. `cfg` must be resolved.
 * Throws DegenerateInput when every candidate generator fails.
 */
PlaneEstimate estimate_plane(const PointCloud& cloud, const CompletionConfig& cfg, bool refine = true);

/// Indices of mirrored points lying in holes of `cloud`: unbalanced, with
/// more mirrored than original points in their cube.
std::vector<std::size_t> detect_hole_indices(const PointCloud& cloud, const PointCloud& mirrored_aligned,
                                             const BalanceConfig& cfg);
PointCloud detect_holes(const PointCloud& cloud, const PointCloud& mirrored_aligned, const BalanceConfig& cfg);

/// `cloud` followed by `holes`.
PointCloud fill(const PointCloud& cloud, const PointCloud& holes);

/// CD(P, P*) / s with s the average nearest-neighbor spacing of P.
double scaled_chamfer(const PointCloud& original, const PointCloud& completed);

/// True keeps the completion: scaled_chamfer(P, P*) <= threshold.
bool skip_validate(const PointCloud& original, const PointCloud& completed, double threshold);

/**
 * Normals, candidates, best-by-balance selection, mirror registration,
 * hole detection and filling, then the skip check. Deterministic for a fixed
 * configuration. Throws InvalidArgument for clouds under 100 points.
 */
CompletionResult complete(const PointCloud& cloud, const CompletionConfig& cfg);

}  // namespace symcomplete
