#pragma once

#include "symcomplete/geometry.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace symcomplete::io {

enum class Format { PlyAscii, PlyBinaryLE, Xyz };

struct CloudFile {
    Format format = Format::PlyBinaryLE;
    PointCloud cloud;
    bool had_normals = false;
    /// Non-fatal notes, e.g. skipped PLY elements.
    std::vector<std::string> warnings;
};

/// Parses an in-memory file. `name_hint` is only used for format detection
/// (extension); the content sniff wins when both disagree.
CloudFile parse_cloud(std::string_view bytes, std::string_view name_hint = {});

CloudFile load_cloud(const std::filesystem::path& path);

std::string serialize_cloud(const PointCloud& cloud, Format format);

/// Throws symcomplete::Error on I/O failure.
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, Format format);

/// .xyz/.txt -> Xyz, anything else -> binary PLY.
Format format_for_path(const std::filesystem::path& path, bool ascii_ply = false);

std::string_view format_name(Format format);

}  // namespace symcomplete::io
