#include "config.hpp"

#include "symcomplete/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace symcomplete::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "; ";
        out += p;
    }
    return out;
}

double to_double(const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("expected a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::invalid_argument("expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

Vec3 to_vec3(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        values.push_back(to_double(trim(item)));
    }
    if (values.size() != 3) {
        throw std::invalid_argument("expected three comma-separated numbers, got '" + text + "'");
    }
    return Vec3(values[0], values[1], values[2]);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

ConfigTable parse_config_text(const std::string& text) {
    ConfigTable table;
    std::vector<std::string> problems;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        std::string line = raw;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                problems.push_back(where + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            problems.push_back(where + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            problems.push_back(where + ": empty key");
            continue;
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (!table.emplace(full, value).second) {
            problems.push_back(where + ": duplicate key '" + full + "'");
        }
    }
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
    return table;
}

ConfigTable load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"config: cannot open '" + path.string() + "'"});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str());
    } catch (const ConfigError& e) {
        std::vector<std::string> problems;
        for (const auto& p : e.problems()) {
            problems.push_back(path.filename().string() + ": " + p);
        }
        throw ConfigError(std::move(problems));
    }
}

OrientationReference parse_orientation(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("expected 'axis:x,y,z' or 'viewpoint:x,y,z', got '" + text + "'");
    }
    const std::string kind = trim(text.substr(0, colon));
    const Vec3 v = to_vec3(text.substr(colon + 1));
    if (kind == "axis") {
        if (v.norm() == 0.0) throw std::invalid_argument("orientation axis must be non-zero");
        return Axis{v.normalized()};
    }
    if (kind == "viewpoint") {
        return Viewpoint{v};
    }
    throw std::invalid_argument("unknown orientation kind '" + kind + "'");
}

void apply_config(const ConfigTable& table, CompletionConfig& cfg) {
    using Setter = std::function<void(const std::string&)>;
    auto& r = cfg.registration;
    const std::map<std::string, Setter> setters = {
        {"balance.epsilon", [&](const std::string& v) { cfg.balance.epsilon = to_double(v); }},
        {"balance.cube_side", [&](const std::string& v) { cfg.balance.cube_side = to_double(v); }},
        {"registration.voxel_size", [&](const std::string& v) { r.voxel_size = to_double(v); }},
        {"registration.fpfh_radius", [&](const std::string& v) { r.fpfh_radius = to_double(v); }},
        {"registration.ransac_iterations", [&](const std::string& v) { r.ransac_iterations = to_unsigned(v); }},
        {"registration.ransac_confidence", [&](const std::string& v) { r.ransac_confidence = to_double(v); }},
        {"registration.ransac_distance_threshold",
         [&](const std::string& v) { r.ransac_distance_threshold = to_double(v); }},
        {"registration.icp_max_iterations", [&](const std::string& v) { r.icp_max_iterations = to_unsigned(v); }},
        {"registration.icp_distance_threshold",
         [&](const std::string& v) { r.icp_distance_threshold = to_double(v); }},
        {"registration.icp_convergence_delta",
         [&](const std::string& v) { r.icp_convergence_delta = to_double(v); }},
        {"normals.neighbors", [&](const std::string& v) { cfg.normal_params.neighbor_count = to_unsigned(v); }},
        {"normals.orientation", [&](const std::string& v) { cfg.normal_params.orientation = parse_orientation(v); }},
        {"completion.skip_threshold",
         [&](const std::string& v) {
             cfg.skip_threshold = (v == "inf") ? std::numeric_limits<double>::infinity() : to_double(v);
         }},
        {"completion.passes", [&](const std::string& v) { cfg.passes = to_unsigned(v); }},
        {"completion.seed", [&](const std::string& v) { cfg.seed = to_unsigned(v); }},
    };
    std::vector<std::string> problems;
    for (const auto& [key, value] : table) {
        const auto it = setters.find(key);
        if (it == setters.end()) {
            problems.push_back(key + ": unknown key");
            continue;
        }
        try {
            it->second(value);
        } catch (const std::exception& e) {
            problems.push_back(key + ": " + e.what());
        }
    }
    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
}

}  // namespace symcomplete::cli
