#include "symcomplete/io.hpp"

#include "symcomplete/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace symcomplete::io {

namespace {

using Unit = ParseError::Unit;

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> scalar_type(std::string_view name) {
    static constexpr std::array<std::pair<std::string_view, ScalarType>, 16> table{{
        {"char", ScalarType::Int8},      {"int8", ScalarType::Int8},       {"uchar", ScalarType::UInt8},
        {"uint8", ScalarType::UInt8},    {"short", ScalarType::Int16},     {"int16", ScalarType::Int16},
        {"ushort", ScalarType::UInt16},  {"uint16", ScalarType::UInt16},   {"int", ScalarType::Int32},
        {"int32", ScalarType::Int32},    {"uint", ScalarType::UInt32},     {"uint32", ScalarType::UInt32},
        {"float", ScalarType::Float32},  {"float32", ScalarType::Float32}, {"double", ScalarType::Float64},
        {"float64", ScalarType::Float64},
    }};
    for (const auto& [n, t] : table) {
        if (n == name) {
            return t;
        }
    }
    return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
    switch (t) {
        case ScalarType::Int8:
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Int32:
        case ScalarType::UInt32:
        case ScalarType::Float32: return 4;
        case ScalarType::Float64: return 8;
    }
    return 0;
}

template <typename T>
T read_le(const unsigned char* p) {
    std::array<unsigned char, sizeof(T)> buf;
    std::memcpy(buf.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf.begin(), buf.end());
    }
    T v;
    std::memcpy(&v, buf.data(), sizeof(T));
    return v;
}

double read_scalar(const unsigned char* p, ScalarType t) {
    switch (t) {
        case ScalarType::Int8: return read_le<std::int8_t>(p);
        case ScalarType::UInt8: return read_le<std::uint8_t>(p);
        case ScalarType::Int16: return read_le<std::int16_t>(p);
        case ScalarType::UInt16: return read_le<std::uint16_t>(p);
        case ScalarType::Int32: return read_le<std::int32_t>(p);
        case ScalarType::UInt32: return read_le<std::uint32_t>(p);
        case ScalarType::Float32: return read_le<float>(p);
        case ScalarType::Float64: return read_le<double>(p);
    }
    return 0.0;
}

template <typename T>
void write_le(std::string& out, T v) {
    std::array<unsigned char, sizeof(T)> buf;
    std::memcpy(buf.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf.begin(), buf.end());
    }
    out.append(reinterpret_cast<const char*>(buf.data()), buf.size());
}

struct Property {
    std::string name;
    ScalarType type = ScalarType::Float32;
    bool is_list = false;
    ScalarType count_type = ScalarType::UInt8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        const auto start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

std::optional<double> parse_double(std::string_view token) {
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double v = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

std::optional<std::size_t> parse_count(std::string_view token) {
    std::size_t v = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return v;
}

/// Splits `bytes` into lines, tracking the byte offset just past each one.
class LineReader {
public:
    explicit LineReader(std::string_view bytes) : bytes_(bytes) {}

    std::optional<std::string_view> next() {
        if (pos_ >= bytes_.size()) {
            return std::nullopt;
        }
        const auto nl = bytes_.find('\n', pos_);
        const auto end = nl == std::string_view::npos ? bytes_.size() : nl;
        auto line = bytes_.substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        pos_ = nl == std::string_view::npos ? bytes_.size() : nl + 1;
        ++line_no_;
        return line;
    }

    std::size_t offset() const { return pos_; }
    std::size_t line_number() const { return line_no_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

struct VertexLayout {
    int x = -1, y = -1, z = -1, nx = -1, ny = -1, nz = -1;
    bool has_normals() const { return nx >= 0 && ny >= 0 && nz >= 0; }
};

VertexLayout vertex_layout(const Element& e, std::size_t line) {
    VertexLayout l;
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& p = e.properties[i];
        const int idx = static_cast<int>(i);
        if (p.is_list) {
            continue;
        }
        if (p.name == "x") l.x = idx;
        else if (p.name == "y") l.y = idx;
        else if (p.name == "z") l.z = idx;
        else if (p.name == "nx") l.nx = idx;
        else if (p.name == "ny") l.ny = idx;
        else if (p.name == "nz") l.nz = idx;
    }
    if (l.x < 0 || l.y < 0 || l.z < 0) {
        throw ParseError("vertex element lacks x/y/z properties", Unit::Line, line);
    }
    return l;
}

void finish_normal(Vec3& n, Unit unit, std::size_t pos) {
    const double len = n.norm();
    if (!std::isfinite(len) || len == 0.0) {
        throw ParseError("zero or non-finite normal", unit, pos);
    }
    if (std::abs(len - 1.0) > kCloudNormalTolerance) {
        n /= len;
    }
}

void push_vertex(CloudFile& file, const std::vector<double>& values, const VertexLayout& l, Unit unit,
                 std::size_t pos) {
    const Point3 p(values[l.x], values[l.y], values[l.z]);
    if (!p.allFinite()) {
        throw ParseError("non-finite vertex coordinate", unit, pos);
    }
    file.cloud.points.push_back(p);
    if (l.has_normals()) {
        Vec3 n(values[l.nx], values[l.ny], values[l.nz]);
        finish_normal(n, unit, pos);
        file.cloud.normals.push_back(n);
    }
}

CloudFile parse_ply(std::string_view bytes) {
    LineReader reader(bytes);
    auto first = reader.next();
    if (!first || *first != "ply") {
        throw ParseError("missing 'ply' magic", Unit::Line, 1);
    }
    std::optional<Format> format;
    std::vector<Element> elements;
    bool header_done = false;
    while (auto line = reader.next()) {
        const auto tok = split_ws(*line);
        const auto ln = reader.line_number();
        if (tok.empty()) {
            continue;
        }
        if (tok[0] == "end_header") {
            header_done = true;
            break;
        }
        if (tok[0] == "comment" || tok[0] == "obj_info") {
            continue;
        }
        if (tok[0] == "format") {
            if (tok.size() != 3 || tok[2] != "1.0") {
                throw ParseError("unsupported format line", Unit::Line, ln);
            }
            if (tok[1] == "ascii") {
                format = Format::PlyAscii;
            } else if (tok[1] == "binary_little_endian") {
                format = Format::PlyBinaryLE;
            } else if (tok[1] == "binary_big_endian") {
                throw ParseError("big-endian binary PLY is not supported", Unit::Line, ln);
            } else {
                throw ParseError("unknown PLY format '" + std::string(tok[1]) + "'", Unit::Line, ln);
            }
        } else if (tok[0] == "element") {
            if (tok.size() != 3) {
                throw ParseError("malformed element line", Unit::Line, ln);
            }
            const auto count = parse_count(tok[2]);
            if (!count) {
                throw ParseError("bad element count", Unit::Line, ln);
            }
            elements.push_back({std::string(tok[1]), *count, {}});
        } else if (tok[0] == "property") {
            if (elements.empty()) {
                throw ParseError("property before any element", Unit::Line, ln);
            }
            Property prop;
            if (tok.size() == 5 && tok[1] == "list") {
                const auto ct = scalar_type(tok[2]);
                const auto it = scalar_type(tok[3]);
                if (!ct || !it || *ct == ScalarType::Float32 || *ct == ScalarType::Float64) {
                    throw ParseError("bad list property types", Unit::Line, ln);
                }
                prop = {std::string(tok[4]), *it, true, *ct};
            } else if (tok.size() == 3) {
                const auto t = scalar_type(tok[1]);
                if (!t) {
                    throw ParseError("unknown property type '" + std::string(tok[1]) + "'", Unit::Line, ln);
                }
                prop = {std::string(tok[2]), *t, false, ScalarType::UInt8};
            } else {
                throw ParseError("malformed property line", Unit::Line, ln);
            }
            elements.back().properties.push_back(prop);
        } else {
            throw ParseError("unexpected header keyword '" + std::string(tok[0]) + "'", Unit::Line, ln);
        }
    }
    if (!header_done) {
        throw ParseError("header not terminated by end_header", Unit::Line, reader.line_number());
    }
    if (!format) {
        throw ParseError("missing format line", Unit::Line, reader.line_number());
    }
    const auto vertex_it = std::find_if(elements.begin(), elements.end(), [](const Element& e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) {
        throw ParseError("no vertex element", Unit::Line, reader.line_number());
    }
    const auto layout = vertex_layout(*vertex_it, reader.line_number());

    CloudFile file;
    file.format = *format;
    file.had_normals = layout.has_normals();
    for (const auto& e : elements) {
        if (e.name != "vertex" && e.count > 0) {
            file.warnings.push_back("skipped PLY element '" + e.name + "' (" + std::to_string(e.count) + " entries)");
        }
    }

    if (*format == Format::PlyAscii) {
        std::vector<double> values;
        for (const auto& e : elements) {
            const bool is_vertex = &e == &*vertex_it;
            if (is_vertex) {
                file.cloud.points.reserve(std::min(e.count, bytes.size() / 2));
            }
            for (std::size_t i = 0; i < e.count; ++i) {
                auto line = reader.next();
                while (line && split_ws(*line).empty()) {
                    line = reader.next();
                }
                const auto ln = reader.line_number();
                if (!line) {
                    throw ParseError("truncated body: expected " + std::to_string(e.count) + " '" + e.name +
                                         "' entries, got " + std::to_string(i),
                                     Unit::Line, ln);
                }
                if (!is_vertex) {
                    continue;
                }
                const auto tok = split_ws(*line);
                values.assign(e.properties.size(), 0.0);
                std::size_t t = 0;
                for (std::size_t p = 0; p < e.properties.size(); ++p) {
                    if (t >= tok.size()) {
                        throw ParseError("too few values on vertex line", Unit::Line, ln);
                    }
                    if (e.properties[p].is_list) {
                        const auto n = parse_count(tok[t++]);
                        if (!n || *n > tok.size() - t) {
                            throw ParseError("bad list length on vertex line", Unit::Line, ln);
                        }
                        t += *n;
                        continue;
                    }
                    const auto v = parse_double(tok[t++]);
                    if (!v) {
                        throw ParseError("invalid number '" + std::string(tok[t - 1]) + "'", Unit::Line, ln);
                    }
                    values[p] = *v;
                }
                push_vertex(file, values, layout, Unit::Line, ln);
            }
            if (is_vertex) {
                break;  // trailing elements are irrelevant
            }
        }
        return file;
    }

    const auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t pos = reader.offset();
    auto need = [&](std::size_t n) {
        if (n > bytes.size() - pos) {
            throw ParseError("truncated binary body", Unit::Byte, pos);
        }
    };
    std::vector<double> values;
    for (const auto& e : elements) {
        const bool is_vertex = &e == &*vertex_it;
        if (is_vertex) {
            const bool fixed = std::none_of(e.properties.begin(), e.properties.end(), [](const Property& p) { return p.is_list; });
            if (fixed) {
                std::size_t stride = 0;
                for (const auto& p : e.properties) {
                    stride += scalar_size(p.type);
                }
                if (stride > 0 && e.count > (bytes.size() - pos) / stride) {
                    throw ParseError("truncated binary body: vertex count exceeds file size", Unit::Byte, pos);
                }
                file.cloud.points.reserve(e.count);
            }
        }
        if (e.properties.empty()) {
            continue;  // entries without properties occupy no bytes
        }
        for (std::size_t i = 0; i < e.count; ++i) {
            const auto entry_start = pos;
            values.assign(e.properties.size(), 0.0);
            for (std::size_t p = 0; p < e.properties.size(); ++p) {
                const auto& prop = e.properties[p];
                if (prop.is_list) {
                    need(scalar_size(prop.count_type));
                    const double n = read_scalar(base + pos, prop.count_type);
                    pos += scalar_size(prop.count_type);
                    if (n < 0) {
                        throw ParseError("negative list length", Unit::Byte, pos);
                    }
                    const auto len = static_cast<std::size_t>(n);
                    const auto sz = scalar_size(prop.type);
                    if (len > (bytes.size() - pos) / sz) {
                        throw ParseError("truncated binary body", Unit::Byte, pos);
                    }
                    pos += len * sz;
                    continue;
                }
                need(scalar_size(prop.type));
                values[p] = read_scalar(base + pos, prop.type);
                pos += scalar_size(prop.type);
            }
            if (is_vertex) {
                push_vertex(file, values, layout, Unit::Byte, entry_start);
            }
        }
        if (is_vertex) {
            break;
        }
    }
    return file;
}

CloudFile parse_xyz(std::string_view bytes) {
    CloudFile file;
    file.format = Format::Xyz;
    LineReader reader(bytes);
    std::size_t columns = 0;
    std::vector<double> values;
    while (auto line = reader.next()) {
        const auto ln = reader.line_number();
        auto tok = split_ws(*line);
        if (tok.empty() || tok[0].front() == '#') {
            continue;
        }
        if (tok.size() != 3 && tok.size() != 6) {
            throw ParseError("expected 3 or 6 columns, got " + std::to_string(tok.size()), Unit::Line, ln);
        }
        if (columns == 0) {
            columns = tok.size();
        } else if (tok.size() != columns) {
            throw ParseError("inconsistent column count", Unit::Line, ln);
        }
        values.clear();
        for (auto t : tok) {
            const auto v = parse_double(t);
            if (!v) {
                throw ParseError("invalid number '" + std::string(t) + "'", Unit::Line, ln);
            }
            values.push_back(*v);
        }
        const Point3 p(values[0], values[1], values[2]);
        if (!p.allFinite()) {
            throw ParseError("non-finite coordinate", Unit::Line, ln);
        }
        file.cloud.points.push_back(p);
        if (columns == 6) {
            Vec3 n(values[3], values[4], values[5]);
            finish_normal(n, Unit::Line, ln);
            file.cloud.normals.push_back(n);
        }
    }
    file.had_normals = columns == 6;
    return file;
}

std::string format_number(double v) {
    std::array<char, 64> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string extension_of(std::string_view name) {
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos) {
        return {};
    }
    std::string ext(name.substr(dot + 1));
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

}  // namespace

CloudFile parse_cloud(std::string_view bytes, std::string_view name_hint) {
    const bool looks_ply = bytes.substr(0, 3) == "ply" && (bytes.size() == 3 || bytes[3] == '\n' || bytes[3] == '\r');
    if (looks_ply) {
        return parse_ply(bytes);
    }
    if (extension_of(name_hint) == "ply") {
        throw ParseError("file has .ply extension but no 'ply' magic", Unit::Byte, 0);
    }
    return parse_xyz(bytes);
}

CloudFile load_cloud(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_cloud(ss.str(), path.filename().string());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.unit(), e.position());
    }
}

std::string serialize_cloud(const PointCloud& cloud, Format format) {
    const bool normals = cloud.has_normals();
    std::string out;
    if (format == Format::Xyz) {
        out.reserve(cloud.size() * (normals ? 120 : 60));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto& p = cloud.points[i];
            out += format_number(p.x()) + ' ' + format_number(p.y()) + ' ' + format_number(p.z());
            if (normals) {
                const auto& n = cloud.normals[i];
                out += ' ' + format_number(n.x()) + ' ' + format_number(n.y()) + ' ' + format_number(n.z());
            }
            out += '\n';
        }
        return out;
    }

    out = "ply\n";
    out += format == Format::PlyAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    if (normals) {
        out += "property double nx\nproperty double ny\nproperty double nz\n";
    }
    out += "end_header\n";
    if (format == Format::PlyAscii) {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const auto& p = cloud.points[i];
            out += format_number(p.x()) + ' ' + format_number(p.y()) + ' ' + format_number(p.z());
            if (normals) {
                const auto& n = cloud.normals[i];
                out += ' ' + format_number(n.x()) + ' ' + format_number(n.y()) + ' ' + format_number(n.z());
            }
            out += '\n';
        }
        return out;
    }
    out.reserve(out.size() + cloud.size() * (normals ? 48 : 24));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            write_le(out, cloud.points[i][a]);
        }
        if (normals) {
            for (int a = 0; a < 3; ++a) {
                write_le(out, cloud.normals[i][a]);
            }
        }
    }
    return out;
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, Format format) {
    const auto bytes = serialize_cloud(cloud, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

Format format_for_path(const std::filesystem::path& path, bool ascii_ply) {
    const auto ext = extension_of(path.filename().string());
    if (ext == "xyz" || ext == "txt") {
        return Format::Xyz;
    }
    return ascii_ply ? Format::PlyAscii : Format::PlyBinaryLE;
}

std::string_view format_name(Format format) {
    switch (format) {
        case Format::PlyAscii: return "ply_ascii";
        case Format::PlyBinaryLE: return "ply_binary_le";
        case Format::Xyz: return "xyz";
    }
    return "unknown";
}

}  // namespace symcomplete::io
