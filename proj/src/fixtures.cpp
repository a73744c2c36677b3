#include "symcomplete/fixtures.hpp"

#include "symcomplete/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace symcomplete::fixtures {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

struct Triangle {
    Point3 a, b, c;
};

class Mesh {
public:
    void add_triangle(const Point3& a, const Point3& b, const Point3& c) {
        const double area = 0.5 * (b - a).cross(c - a).norm();
        if (area <= 0.0) return;
        triangles_.push_back({a, b, c});
        total_ += area;
        cumulative_.push_back(total_);
    }

    void add_quad(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
        add_triangle(a, b, c);
        add_triangle(a, c, d);
    }

    void add_box(const Point3& center, const Vec3& half) {
        std::array<Point3, 8> v;
        for (int i = 0; i < 8; ++i) {
            v[i] = center + Vec3((i & 1 ? 1 : -1) * half.x(), (i & 2 ? 1 : -1) * half.y(),
                                 (i & 4 ? 1 : -1) * half.z());
        }
        add_quad(v[0], v[1], v[3], v[2]);
        add_quad(v[4], v[5], v[7], v[6]);
        add_quad(v[0], v[1], v[5], v[4]);
        add_quad(v[2], v[3], v[7], v[6]);
        add_quad(v[0], v[2], v[6], v[4]);
        add_quad(v[1], v[3], v[7], v[5]);
    }

    /// Uniform by area.
    Point3 sample(Rng& rng) const {
        const double t = uniform(rng, 0.0, total_);
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
        const auto& tri = triangles_[std::min<std::size_t>(it - cumulative_.begin(), triangles_.size() - 1)];
        double u = uniform(rng, 0.0, 1.0);
        double v = uniform(rng, 0.0, 1.0);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        return tri.a + u * (tri.b - tri.a) + v * (tri.c - tri.a);
    }

private:
    std::vector<Triangle> triangles_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

Mesh box_mesh(Rng& rng, Vec3& half) {
    half = Vec3(uniform(rng, 0.5, 1.0), uniform(rng, 0.3, 0.8), uniform(rng, 0.15, 0.55));
    Mesh m;
    m.add_box(Point3::Zero(), half);
    return m;
}

// Isosceles triangular cross-section in x-z, tapering along y.
Mesh wedge_mesh(Rng& rng) {
    const double w = uniform(rng, 0.4, 0.7);
    const double h = uniform(rng, 0.5, 0.9);
    const double len = uniform(rng, 1.2, 1.8);
    const double taper = uniform(rng, 0.35, 0.6);
    const double y0 = -0.5 * len;
    const double y1 = 0.5 * len;
    const Point3 a0(-w, y0, -0.5 * h), b0(w, y0, -0.5 * h), c0(0, y0, 0.5 * h);
    const Point3 a1(-w * taper, y1, -0.5 * h), b1(w * taper, y1, -0.5 * h), c1(0, y1, -0.5 * h + h * taper);
    Mesh m;
    m.add_quad(a0, b0, b1, a1);
    m.add_quad(a0, c0, c1, a1);
    m.add_quad(b0, c0, c1, b1);
    m.add_triangle(a0, b0, c0);
    m.add_triangle(a1, b1, c1);
    return m;
}

Mesh composite_mesh(Rng& rng) {
    const double s = uniform(rng, 0.85, 1.15);
    const double span = uniform(rng, 0.8, 1.1);
    Mesh m;
    m.add_box(Point3(0, 0, 0), Vec3(0.12, 0.8, 0.1) * s);
    m.add_box(Point3(0, 0.1 * s, 0), Vec3(span, 0.16 * s, 0.025 * s));
    m.add_box(Point3(0, -0.7 * s, 0.08 * s), Vec3(0.32 * s, 0.08 * s, 0.015 * s));
    m.add_box(Point3(0, -0.68 * s, 0.26 * s), Vec3(0.015 * s, 0.1 * s, 0.16 * s));
    const double y = 0.8 * s;
    const Point3 apex(0, 1.1 * s, 0);
    const Point3 c00(-0.12 * s, y, -0.1 * s), c10(0.12 * s, y, -0.1 * s), c11(0.12 * s, y, 0.1 * s),
        c01(-0.12 * s, y, 0.1 * s);
    m.add_triangle(c00, c10, apex);
    m.add_triangle(c10, c11, apex);
    m.add_triangle(c11, c01, apex);
    m.add_triangle(c01, c00, apex);
    return m;
}

struct Ellipsoid {
    Point3 center;
    Mat3 rotation;
    Vec3 radii;

    bool contains(const Point3& x) const {
        const Vec3 local = rotation.transpose() * (x - center);
        return local.cwiseQuotient(radii).squaredNorm() < 1.0 - 1e-9;
    }
};

Point3 random_unit(Rng& rng) {
    std::normal_distribution<double> g;
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-12);
    return v.normalized();
}

PointCloud blob_cloud(Rng& rng, std::size_t n) {
    const int count = 4 + static_cast<int>(rng() % 2);
    std::vector<Ellipsoid> parts;
    for (int i = 0; i < count; ++i) {
        parts.push_back({Point3(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5)),
                         rotation_from_uniform(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)),
                         Vec3(uniform(rng, 0.15, 0.55), uniform(rng, 0.15, 0.45), uniform(rng, 0.1, 0.35))});
    }
    // Surface weight ~ largest cross-section area; only points on the outer
    // surface of the union are kept.
    std::vector<double> weights;
    for (const auto& e : parts) {
        weights.push_back(e.radii[0] * e.radii[1] + e.radii[1] * e.radii[2] + e.radii[0] * e.radii[2]);
    }
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    PointCloud cloud;
    cloud.points.reserve(n);
    while (cloud.size() < n) {
        const int k = pick(rng);
        const auto& e = parts[k];
        const Point3 x = e.center + e.rotation * random_unit(rng).cwiseProduct(e.radii);
        bool inside = false;
        for (int j = 0; j < count && !inside; ++j) {
            inside = j != k && parts[j].contains(x);
        }
        if (!inside) cloud.points.push_back(x);
    }
    return cloud;
}

// Fibonacci lattice on the unit sphere with its polar axis along x; the
// levels are symmetric in x, so the half x > 0 mirrors onto the other half.
std::vector<Point3> half_fibonacci(std::size_t pairs) {
    const std::size_t total = 2 * pairs;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Point3> out;
    out.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(total);
        const double r = std::sqrt(std::max(0.0, 1.0 - x * x));
        const double phi = golden * static_cast<double>(i);
        out.emplace_back(x, r * std::cos(phi), r * std::sin(phi));
    }
    return out;
}

Point3 mirror_x(const Point3& p) { return Point3(-p.x(), p.y(), p.z()); }

}  // namespace

std::string_view to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Box: return "box";
        case ShapeKind::Wedge: return "wedge";
        case ShapeKind::Ellipsoid: return "ellipsoid";
        case ShapeKind::CompositeSymmetric: return "composite";
        case ShapeKind::AsymmetricBlob: return "blob";
    }
    return "unknown";
}

ShapeKind parse_kind(std::string_view name) {
    for (auto kind : {ShapeKind::Box, ShapeKind::Wedge, ShapeKind::Ellipsoid, ShapeKind::CompositeSymmetric,
                      ShapeKind::AsymmetricBlob}) {
        if (to_string(kind) == name) return kind;
    }
    throw InvalidArgument("unknown shape kind: " + std::string(name));
}

Plane planted_plane(const ShapeSpec& spec) {
    return Plane{spec.pose.translation, spec.pose.rotation.col(0)};
}

Fixture generate(const ShapeSpec& spec) {
    if (spec.point_count < 100) {
        throw InvalidArgument("fixtures need at least 100 points");
    }
    if (!spec.pose.is_valid()) {
        throw InvalidArgument("fixture pose is not a rigid transform");
    }
    Rng rng(spec.seed);
    const std::size_t n = spec.point_count;
    const std::size_t pairs = n / 2;
    PointCloud local;
    local.points.reserve(n);
    std::vector<Plane> planes{Plane{Point3::Zero(), Vec3::UnitX()}};

    if (spec.kind == ShapeKind::AsymmetricBlob) {
        local = blob_cloud(rng, n);
        planes.clear();
    } else if (spec.kind == ShapeKind::Ellipsoid) {
        const Vec3 radii(uniform(rng, 0.5, 0.9), uniform(rng, 0.35, 0.8), uniform(rng, 0.25, 0.7));
        for (const auto& u : half_fibonacci(pairs)) {
            const Point3 p = u.cwiseProduct(radii);
            local.points.push_back(p);
            local.points.push_back(mirror_x(p));
        }
        if (n % 2) {
            local.points.emplace_back(0.0, 0.0, radii.z());
        }
        planes.push_back({Point3::Zero(), Vec3::UnitY()});
        planes.push_back({Point3::Zero(), Vec3::UnitZ()});
    } else {
        Vec3 half = Vec3::Zero();
        Mesh mesh = spec.kind == ShapeKind::Box     ? box_mesh(rng, half)
                    : spec.kind == ShapeKind::Wedge ? wedge_mesh(rng)
                                                    : composite_mesh(rng);
        for (std::size_t i = 0; i < pairs; ++i) {
            Point3 p = mesh.sample(rng);
            p.x() = std::abs(p.x());
            local.points.push_back(p);
            local.points.push_back(mirror_x(p));
        }
        if (n % 2) {
            Point3 best = mesh.sample(rng);
            for (int k = 0; k < 255; ++k) {
                const Point3 c = mesh.sample(rng);
                if (std::abs(c.x()) < std::abs(best.x())) best = c;
            }
            best.x() = 0.0;
            local.points.push_back(best);
        }
        if (spec.kind == ShapeKind::Box) {
            planes.push_back({Point3::Zero(), Vec3::UnitY()});
            planes.push_back({Point3::Zero(), Vec3::UnitZ()});
        }
    }

    Fixture out;
    out.cloud = apply_transform(local, spec.pose);
    for (const auto& p : planes) {
        out.symmetry_planes.push_back(Plane{spec.pose(p.anchor), spec.pose.rotation * p.normal});
    }
    if (!out.symmetry_planes.empty()) {
        out.plane = out.symmetry_planes.front();
    }
    out.bounds = bounding_box(out.cloud);
    return out;
}

RigidTransform random_pose(std::uint64_t seed, double max_translation) {
    Rng rng(seed);
    RigidTransform pose;
    pose.rotation = rotation_from_uniform(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1));
    pose.translation = Vec3(uniform(rng, -max_translation, max_translation),
                            uniform(rng, -max_translation, max_translation),
                            uniform(rng, -max_translation, max_translation));
    return pose;
}

RigidTransform canonical_pose(std::uint64_t seed, double max_translation) {
    Rng rng(seed);
    const double spin = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const int axis = static_cast<int>(rng() % 3);
    const double sign = rng() % 2 ? 1.0 : -1.0;
    // Proper signed permutation taking e_x to sign * e_axis.
    Mat3 perm = Mat3::Zero();
    perm(axis, 0) = sign;
    perm((axis + 1) % 3, 1) = 1.0;
    perm((axis + 2) % 3, 2) = sign;
    RigidTransform pose;
    pose.rotation = perm * Eigen::AngleAxisd(spin, Vec3::UnitX()).toRotationMatrix();
    pose.translation = Vec3(uniform(rng, -max_translation, max_translation),
                            uniform(rng, -max_translation, max_translation),
                            uniform(rng, -max_translation, max_translation));
    return pose;
}

std::vector<ShapeSpec> symmetric_suite(std::size_t count, std::size_t point_count, std::uint64_t seed,
                                       PoseMode mode) {
    std::vector<ShapeSpec> specs;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        ShapeSpec s;
        s.kind = kSymmetricKinds[i % std::size(kSymmetricKinds)];
        s.point_count = point_count;
        s.seed = rng();
        s.pose = mode == PoseMode::Canonical ? canonical_pose(rng()) : random_pose(rng());
        specs.push_back(s);
    }
    return specs;
}

}  // namespace symcomplete::fixtures
