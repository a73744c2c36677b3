#include "symcomplete/completion.hpp"

#include "symcomplete/error.hpp"
#include "symcomplete/spatial_index.hpp"

#include <cmath>
#include <string>

namespace symcomplete {

std::vector<std::string> CompletionConfig::problems() const {
    std::vector<std::string> out;
    auto check = [&out](bool ok, const char* message) {
        if (!ok) out.emplace_back(message);
    };
    auto auto_or_positive = [](double v) { return v == 0.0 || (v > 0.0 && std::isfinite(v)); };
    const auto& r = registration;
    check(balance.epsilon > 0.0 && balance.epsilon < 1.0, "balance.epsilon: must lie in (0, 1)");
    check(auto_or_positive(balance.cube_side), "balance.cube_side: must be > 0 (or 0 for auto)");
    check(auto_or_positive(r.voxel_size), "registration.voxel_size: must be > 0 (or 0 for auto)");
    check(auto_or_positive(r.fpfh_radius), "registration.fpfh_radius: must be > 0 (or 0 for auto)");
    check(auto_or_positive(r.ransac_distance_threshold),
          "registration.ransac_distance_threshold: must be > 0 (or 0 for auto)");
    check(auto_or_positive(r.icp_distance_threshold),
          "registration.icp_distance_threshold: must be > 0 (or 0 for auto)");
    check(auto_or_positive(r.icp_convergence_delta),
          "registration.icp_convergence_delta: must be > 0 (or 0 for auto)");
    check(r.ransac_iterations > 0, "registration.ransac_iterations: must be >= 1");
    check(r.ransac_confidence > 0.0 && r.ransac_confidence < 1.0,
          "registration.ransac_confidence: must lie in (0, 1)");
    check(r.icp_max_iterations > 0, "registration.icp_max_iterations: must be >= 1");
    check(skip_threshold >= 0.0, "completion.skip_threshold: must be >= 0");
    check(passes > 0, "completion.passes: must be >= 1");
    try {
        normal_params.validate();
    } catch (const InvalidArgument& e) {
        out.push_back(std::string("normals: ") + e.what());
    }
    return out;
}

void CompletionConfig::validate() const {
    const auto found = problems();
    if (!found.empty()) {
        std::string message = found.front();
        for (std::size_t i = 1; i < found.size(); ++i) {
            message += "; " + found[i];
        }
        throw InvalidArgument(message);
    }
}

CompletionConfig resolve_config(const CompletionConfig& cfg, double average_spacing) {
    CompletionConfig out = cfg;
    const auto defaults = default_registration_params(average_spacing, cfg.seed);
    auto fill_in = [](double& field, double fallback) {
        if (!(field > 0.0)) field = fallback;
    };
    fill_in(out.balance.cube_side, kDefaultCubeSideFactor * average_spacing);
    auto& r = out.registration;
    const bool custom_voxel = r.voxel_size > 0.0;
    fill_in(r.voxel_size, defaults.voxel_size);
    fill_in(r.fpfh_radius, custom_voxel ? 5.0 * r.voxel_size : defaults.fpfh_radius);
    fill_in(r.ransac_distance_threshold, custom_voxel ? 1.5 * r.voxel_size : defaults.ransac_distance_threshold);
    fill_in(r.icp_distance_threshold, custom_voxel ? 1.5 * r.voxel_size : defaults.icp_distance_threshold);
    fill_in(r.icp_convergence_delta, defaults.icp_convergence_delta);
    r.seed = cfg.seed;
    r.orientation = cfg.normal_params.orientation;
    return out;
}

std::vector<std::size_t> detect_hole_indices(const PointCloud& cloud, const PointCloud& mirrored_aligned,
                                             const BalanceConfig& cfg) {
    cfg.validate();
    const SpatialIndex original(cloud);
    const SpatialIndex mirrored(mirrored_aligned);
    std::vector<std::size_t> holes;
    for (std::size_t i = 0; i < mirrored_aligned.size(); ++i) {
        const auto c = is_balanced(mirrored_aligned.points[i], original, mirrored, cfg);
        if (!c.balanced && c.in_second > c.in_first) {
            holes.push_back(i);
        }
    }
    return holes;
}

PointCloud detect_holes(const PointCloud& cloud, const PointCloud& mirrored_aligned, const BalanceConfig& cfg) {
    return select(mirrored_aligned, detect_hole_indices(cloud, mirrored_aligned, cfg));
}

PointCloud fill(const PointCloud& cloud, const PointCloud& holes) {
    if (holes.empty()) {
        return cloud;
    }
    return concatenate(cloud, holes);
}

double scaled_chamfer(const PointCloud& original, const PointCloud& completed) {
    const double s = average_nn_distance(original);
    return chamfer_distance(original, completed) / s;
}

bool skip_validate(const PointCloud& original, const PointCloud& completed, double threshold) {
    return scaled_chamfer(original, completed) <= threshold;
}

PlaneEstimate estimate_plane(const PointCloud& input, const CompletionConfig& cfg, bool refine) {
    PlaneEstimate out;
    out.with_normals = input.has_normals() ? orient_normals(input, cfg.normal_params.orientation)
                                           : estimate_normals(input, cfg.normal_params).cloud;
    out.detection = detect_symmetry(out.with_normals, cfg.balance);
    out.notes = out.detection.diagnostics;
    out.plane = out.detection.best.plane;
    if (!refine) {
        return out;
    }
    try {
        const auto refinement = refine_symmetry_plane(out.with_normals, out.plane, cfg.registration);
        out.registration = refinement.registration;
        out.global_registration = refinement.global;
        out.refined_score =
            balanced_distance(input, reflect(PointCloud(input.points), refinement.plane), cfg.balance);
        if (out.refined_score <= out.detection.best.score) {
            out.plane = refinement.plane;
            out.plane_refined = true;
        } else {
            out.notes.push_back("refined plane balances worse than the best candidate; using best candidate");
        }
    } catch (const Error& e) {
        out.notes.push_back(std::string("refinement failed, using best candidate: ") + e.what());
    }
    return out;
}

CompletionResult complete(const PointCloud& input, const CompletionConfig& cfg_in) {
    cfg_in.validate();
    input.validate();
    if (input.size() < kMinimumCompletionSize) {
        throw InvalidArgument("completion needs at least " + std::to_string(kMinimumCompletionSize) +
                              " points, got " + std::to_string(input.size()));
    }
    CompletionResult result;
    auto& diag = result.diagnostics;
    const SpatialIndex input_index(input);
    diag.average_spacing = average_nn_distance(input, input_index);
    const CompletionConfig cfg = resolve_config(cfg_in, diag.average_spacing);
    diag.cube_side = cfg.balance.cube_side;

    auto give_up = [&](const std::string& reason) {
        result.completed = input;
        result.added_points = PointCloud{};
        result.skipped = true;
        result.skip_reason = reason;
        return result;
    };

    PlaneEstimate estimate;
    try {
        estimate = estimate_plane(input, cfg);
    } catch (const DegenerateInput& e) {
        diag.notes.push_back(std::string("candidates: ") + e.what());
        return give_up(std::string("no symmetry candidate: ") + e.what());
    }
    diag.candidates = estimate.detection.candidates;
    diag.best_candidate = estimate.detection.best;
    diag.initial_plane = estimate.detection.best.plane;
    diag.registration = estimate.registration;
    diag.global_registration = estimate.global_registration;
    diag.plane_refined = estimate.plane_refined;
    diag.refined_score = estimate.refined_score;
    diag.notes.insert(diag.notes.end(), estimate.notes.begin(), estimate.notes.end());
    const Plane plane = estimate.plane;
    result.plane = plane;

    // Mirrored points carry the input's normals (reflected) only when the
    // input had normals of its own.
    PointCloud completed = input;
    for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
        const PointCloud mirrored = reflect(completed, plane);
        const PointCloud holes = detect_holes(completed, mirrored, cfg.balance);
        ++diag.passes_run;
        if (holes.empty()) {
            break;
        }
        completed = fill(completed, holes);
    }
    diag.raw_added = completed.size() - input.size();
    diag.scaled_chamfer = chamfer_distance(input, input_index, completed, SpatialIndex(completed)) /
                          diag.average_spacing;

    if (!(diag.scaled_chamfer <= cfg.skip_threshold)) {
        diag.notes.push_back("skipped: scaled chamfer " + std::to_string(diag.scaled_chamfer) + " > threshold " +
                             std::to_string(cfg.skip_threshold));
        return give_up("scaled chamfer distance above threshold");
    }
    result.added_points.points.assign(completed.points.begin() + static_cast<std::ptrdiff_t>(input.size()),
                                      completed.points.end());
    if (completed.has_normals()) {
        result.added_points.normals.assign(completed.normals.begin() + static_cast<std::ptrdiff_t>(input.size()),
                                           completed.normals.end());
    }
    result.completed = std::move(completed);
    return result;
}

}  // namespace symcomplete
