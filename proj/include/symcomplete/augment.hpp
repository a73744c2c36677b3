#pragma once

#include "symcomplete/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace symcomplete {

/// Accepted absolute deviation of the achieved removal fraction from the rate.
inline constexpr double kDamageRateTolerance = 0.02;
/// Concentration of the symmetric Dirichlet over region sizes.
inline constexpr double kRegionSizeConcentration = 2.0;

struct DamageSpec {
    double damage_rate = 0.05;
    std::uint64_t seed = 0;

    /// floor(0.7 * DR_pct), at least 1, with DR_pct = 100 * DR.
    std::size_t region_count_low() const;
    /// ceil(0.95 * DR_pct).
    std::size_t region_count_high() const;

    void validate() const;
};

struct DamageRegion {
    Point3 center = Point3::Zero();
    /// Indices into the original cloud, in removal order.
    std::vector<std::size_t> removed;
    /// Distance from the center to the farthest removed point.
    double radius = 0.0;
};

struct DamageRecord {
    PointCloud damaged;
    std::vector<std::size_t> removed_indices;  // sorted, distinct
    std::vector<Point3> region_centers;
    std::vector<DamageRegion> regions;
    double achieved_rate = 0.0;
};

/**
 * Carves round(DR * |P|) points out of `cloud` as h localized regions, h drawn
 * uniformly from the region-count bounds. Regions grow round-robin from seed points
 * by taking their nearest remaining points until each meets its
 * Dirichlet-drawn share. Throws InvalidArgument when the request is infeasible.
 */
DamageRecord damage(const PointCloud& cloud, const DamageSpec& spec);

/// Seed for one (file, rate) pair derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& file_name, double rate);

/// "<stem>__dr05" style output stem for a rate.
std::string damaged_stem(const std::string& input_stem, double rate);

struct BatchEntry {
    std::string input;
    std::string output;   // empty on failure
    std::string sidecar;  // empty on failure
    double rate = 0.0;
    std::string checksum;  // SHA-256 of the output file, hex
    double achieved_rate = 0.0;
    std::string error;     // non-empty when the input could not be processed
};

struct BatchSummary {
    std::filesystem::path manifest;
    std::vector<BatchEntry> entries;  // sorted by (input, rate)
    std::size_t failures = 0;
};

/**
 * Damages every cloud in `dir_in` (.ply, .xyz, .txt; not recursive) at every
 * rate. Writes damaged clouds in the input's format, a JSON sidecar per
 * output and `manifest.json`. Unreadable files are recorded in the manifest
 * and skipped. `jobs` bounds the worker pool.
 */
BatchSummary damage_batch(const std::filesystem::path& dir_in, const std::filesystem::path& dir_out,
                          const std::vector<double>& rates, std::uint64_t seed, std::size_t jobs = 1);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Sidecar JSON text for a record.
std::string damage_sidecar_json(const DamageRecord& record, const DamageSpec& spec, std::size_t original_size);

}  // namespace symcomplete
