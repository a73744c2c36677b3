#include "symcomplete/convex_hull.hpp"

#include "symcomplete/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace symcomplete {

namespace {

/// Adjacent triangles whose unit normals agree this closely are one facet.
constexpr double kCoplanarCos = 1.0 - 1e-12;

struct Face {
    std::array<std::uint32_t, 3> v{};
    Vec3 normal = Vec3::Zero();
    double offset = 0.0;
    std::vector<std::uint32_t> outside;
    bool alive = true;

    double distance(const Point3& p) const { return normal.dot(p) - offset; }
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

class Quickhull {
public:
    explicit Quickhull(const std::vector<Point3>& pts) : pts_(pts) {
        double scale = 0.0;
        for (const auto& p : pts_) {
            scale = std::max(scale, p.cwiseAbs().maxCoeff());
        }
        eps_ = 1e-10 * std::max(scale, 1e-300);
    }

    ConvexHull run() {
        if (pts_.size() < 4) {
            throw DegenerateInput("convex hull needs at least 4 points");
        }
        for (const auto& p : pts_) {
            if (!p.allFinite()) {
                throw InvalidArgument("convex hull input has non-finite coordinates");
            }
        }
        initial_simplex();
        std::vector<std::int32_t> pending;
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            pending.push_back(static_cast<std::int32_t>(f));
        }
        while (!pending.empty()) {
            const auto f = pending.back();
            pending.pop_back();
            if (!faces_[f].alive || faces_[f].outside.empty()) {
                continue;
            }
            for (auto nf : add_point(f)) {
                pending.push_back(nf);
            }
        }
        return collect();
    }

private:
    void initial_simplex() {
        std::array<std::uint32_t, 6> extremes{};
        for (std::uint32_t i = 0; i < pts_.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                if (pts_[i][a] < pts_[extremes[2 * a]][a]) extremes[2 * a] = i;
                if (pts_[i][a] > pts_[extremes[2 * a + 1]][a]) extremes[2 * a + 1] = i;
            }
        }
        std::uint32_t a = extremes[0], b = extremes[1];
        double best = -1.0;
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = i + 1; j < 6; ++j) {
                const double d = (pts_[extremes[i]] - pts_[extremes[j]]).squaredNorm();
                if (d > best) {
                    best = d;
                    a = extremes[i];
                    b = extremes[j];
                }
            }
        }
        if (std::sqrt(best) <= eps_) {
            throw DegenerateInput("convex hull input points coincide");
        }
        const Vec3 ab = (pts_[b] - pts_[a]).normalized();
        std::uint32_t c = a;
        best = -1.0;
        for (std::uint32_t i = 0; i < pts_.size(); ++i) {
            const double d = (pts_[i] - pts_[a]).cross(ab).norm();
            if (d > best) {
                best = d;
                c = i;
            }
        }
        if (best <= eps_) {
            throw DegenerateInput("convex hull input is collinear");
        }
        const Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]).normalized();
        std::uint32_t d = a;
        best = -1.0;
        for (std::uint32_t i = 0; i < pts_.size(); ++i) {
            const double dist = std::abs(n.dot(pts_[i] - pts_[a]));
            if (dist > best) {
                best = dist;
                d = i;
            }
        }
        if (best <= eps_) {
            throw DegenerateInput("2D hull: input is coplanar");
        }
        interior_ = (pts_[a] + pts_[b] + pts_[c] + pts_[d]) / 4.0;
        const std::array<std::array<std::uint32_t, 3>, 4> tris{{{a, b, c}, {a, b, d}, {a, c, d}, {b, c, d}}};
        for (auto t : tris) {
            Face face = make_face(t[0], t[1], t[2]);
            if (face.distance(interior_) > 0.0) {
                face = make_face(t[0], t[2], t[1]);
            }
            add_face(std::move(face));
        }
        std::vector<bool> used(pts_.size(), false);
        used[a] = used[b] = used[c] = used[d] = true;
        std::vector<std::uint32_t> rest;
        for (std::uint32_t i = 0; i < pts_.size(); ++i) {
            if (!used[i]) rest.push_back(i);
        }
        std::vector<std::int32_t> all{0, 1, 2, 3};
        assign(rest, all);
    }

    Face make_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
        Face f;
        f.v = {a, b, c};
        Vec3 n = (pts_[b] - pts_[a]).cross(pts_[c] - pts_[a]);
        const double len = n.norm();
        f.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
        f.offset = f.normal.dot(pts_[a]);
        return f;
    }

    std::int32_t add_face(Face face) {
        const auto id = static_cast<std::int32_t>(faces_.size());
        for (int e = 0; e < 3; ++e) {
            edges_[edge_key(face.v[e], face.v[(e + 1) % 3])] = id;
        }
        faces_.push_back(std::move(face));
        return id;
    }

    void assign(const std::vector<std::uint32_t>& candidates, const std::vector<std::int32_t>& targets) {
        for (auto p : candidates) {
            double best = eps_;
            std::int32_t owner = -1;
            for (auto f : targets) {
                const double d = faces_[f].distance(pts_[p]);
                if (d > best) {
                    best = d;
                    owner = f;
                }
            }
            if (owner >= 0) {
                faces_[owner].outside.push_back(p);
            }
        }
    }

    std::vector<std::int32_t> add_point(std::int32_t start) {
        const auto& out = faces_[start].outside;
        const auto eye = *std::max_element(out.begin(), out.end(), [&](std::uint32_t x, std::uint32_t y) {
            return faces_[start].distance(pts_[x]) < faces_[start].distance(pts_[y]);
        });
        const Point3& e = pts_[eye];

        std::vector<std::int32_t> visible{start};
        std::vector<char> state(faces_.size(), 0);  // 0 unknown, 1 visible, 2 hidden
        state[start] = 1;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
        for (std::size_t k = 0; k < visible.size(); ++k) {
            const Face& face = faces_[visible[k]];
            for (int i = 0; i < 3; ++i) {
                const auto u = face.v[i];
                const auto w = face.v[(i + 1) % 3];
                const auto it = edges_.find(edge_key(w, u));
                if (it == edges_.end()) {
                    throw Error("convex hull: broken adjacency");
                }
                const auto g = it->second;
                if (state[g] == 0) {
                    state[g] = faces_[g].distance(e) > eps_ ? 1 : 2;
                    if (state[g] == 1) {
                        visible.push_back(g);
                    }
                }
                if (state[g] == 2) {
                    horizon.emplace_back(u, w);
                }
            }
        }

        std::vector<std::uint32_t> orphans;
        for (auto f : visible) {
            Face& face = faces_[f];
            face.alive = false;
            for (int i = 0; i < 3; ++i) {
                edges_.erase(edge_key(face.v[i], face.v[(i + 1) % 3]));
            }
            for (auto p : face.outside) {
                if (p != eye) orphans.push_back(p);
            }
            face.outside.clear();
            face.outside.shrink_to_fit();
        }
        std::vector<std::int32_t> created;
        created.reserve(horizon.size());
        for (auto [u, w] : horizon) {
            created.push_back(add_face(make_face(u, w, eye)));
        }
        assign(orphans, created);
        return created;
    }

    ConvexHull collect() const {
        ConvexHull hull;
        std::vector<bool> is_vertex(pts_.size(), false);
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            const Face& face = faces_[f];
            if (!face.alive) continue;
            hull.faces.push_back({face.v[0], face.v[1], face.v[2]});
            for (int i = 0; i < 3; ++i) {
                is_vertex[face.v[i]] = true;
                const auto u = face.v[i];
                const auto w = face.v[(i + 1) % 3];
                if (u > w) continue;
                const auto g = edges_.at(edge_key(w, u));
                if (face.normal.dot(faces_[g].normal) < kCoplanarCos) {
                    hull.edges.emplace_back(u, w);
                }
            }
        }
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            if (is_vertex[i]) hull.vertices.push_back(i);
        }
        std::sort(hull.edges.begin(), hull.edges.end());
        return hull;
    }

    const std::vector<Point3>& pts_;
    double eps_ = 0.0;
    Point3 interior_ = Point3::Zero();
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, std::int32_t> edges_;
};

}  // namespace

ConvexHull convex_hull(const std::vector<Point3>& points) {
    if (points.size() > 0xFFFFFFFFull) {
        throw InvalidArgument("cloud too large for convex hull");
    }
    return Quickhull(points).run();
}

ConvexHull convex_hull(const PointCloud& cloud) { return convex_hull(cloud.points); }

}  // namespace symcomplete
