#pragma once

#include "symcomplete/completion.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcomplete::cli {

/// Field-level configuration problems; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// "section.key" -> raw value text (quotes stripped).
using ConfigTable = std::map<std::string, std::string>;

/**
 * Minimal TOML subset: `[section]` headers, `key = value` lines, `#`
 * comments, bare or double-quoted values. Throws ConfigError with line
 * numbers on malformed lines or duplicate keys.
 */
ConfigTable parse_config_text(const std::string& text);
ConfigTable load_config_file(const std::filesystem::path& path);

/**
 * Applies the recognized keys onto `cfg`:
 *   [balance] epsilon, cube_side
 *   [registration] voxel_size, fpfh_radius, ransac_iterations, ransac_confidence,
 *                  ransac_distance_threshold, icp_max_iterations,
 *                  icp_distance_threshold, icp_convergence_delta
 *   [normals] neighbors, orientation ("axis:x,y,z" or "viewpoint:x,y,z")
 *   [completion] skip_threshold, passes, seed
 * Unknown keys and unparsable values are collected and thrown together.
 */
void apply_config(const ConfigTable& table, CompletionConfig& cfg);

/// "axis:x,y,z" / "viewpoint:x,y,z".
OrientationReference parse_orientation(const std::string& text);

}  // namespace symcomplete::cli
