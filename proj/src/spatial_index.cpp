#include "symcomplete/spatial_index.hpp"

#include "symcomplete/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace symcomplete {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
    return a.distance_sq < b.distance_sq || (a.distance_sq == b.distance_sq && a.index < b.index);
}

double box_distance_sq(const Point3& q, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double v = q[a] < lo[a] ? lo[a] - q[a] : (q[a] > hi[a] ? q[a] - hi[a] : 0.0);
        d += v * v;
    }
    return d;
}

bool in_cube(const Point3& p, const Point3& lo, const Point3& hi) {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() && p.z() >= lo.z() &&
           p.z() <= hi.z();
}

}  // namespace

SpatialIndex::SpatialIndex(std::vector<Point3> points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("cloud too large for spatial index");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = points_[order_[begin]];
    node.hi = node.lo;
    for (auto i = begin; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[order_[i]]);
        node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= leaf_size_) {
        return id;
    }
    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis];
                         const double pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                     });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

std::vector<Neighbor> SpatialIndex::knn(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> heap;  // max-heap on `closer`
    if (k == 0 || points_.empty()) {
        return heap;
    }
    heap.reserve(k + 1);
    auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().distance_sq; };

    std::vector<std::pair<double, std::int32_t>> stack;
    stack.emplace_back(box_distance_sq(query, nodes_[0].lo, nodes_[0].hi), 0);
    while (!stack.empty()) {
        auto [bound, id] = stack.back();
        stack.pop_back();
        if (bound > worst()) {
            continue;
        }
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                const auto idx = order_[i];
                const Neighbor cand{idx, (points_[idx] - query).squaredNorm()};
                if (heap.size() < k) {
                    heap.push_back(cand);
                    std::push_heap(heap.begin(), heap.end(), closer);
                } else if (closer(cand, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), closer);
                    heap.back() = cand;
                    std::push_heap(heap.begin(), heap.end(), closer);
                }
            }
            continue;
        }
        const double dl = box_distance_sq(query, nodes_[node.left].lo, nodes_[node.left].hi);
        const double dr = box_distance_sq(query, nodes_[node.right].lo, nodes_[node.right].hi);
        // Push the farther child first so the nearer one is explored first.
        if (dl <= dr) {
            stack.emplace_back(dr, node.right);
            stack.emplace_back(dl, node.left);
        } else {
            stack.emplace_back(dl, node.left);
            stack.emplace_back(dr, node.right);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
}

Neighbor SpatialIndex::nearest(const Point3& query) const {
    if (points_.empty()) {
        throw InvalidArgument("nearest-neighbor query on an empty index");
    }
    return knn(query, 1).front();
}

std::vector<Neighbor> SpatialIndex::radius(const Point3& query, double radius) const {
    std::vector<Neighbor> out;
    if (points_.empty() || !(radius >= 0.0)) {
        return out;
    }
    const double r2 = std::isinf(radius) ? std::numeric_limits<double>::infinity() : radius * radius;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (box_distance_sq(query, node.lo, node.hi) > r2) {
            continue;
        }
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                const auto idx = order_[i];
                const double d2 = (points_[idx] - query).squaredNorm();
                if (d2 <= r2) {
                    out.push_back({idx, d2});
                }
            }
            continue;
        }
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    std::sort(out.begin(), out.end(), closer);
    return out;
}

std::size_t SpatialIndex::cube_count(const Point3& center, double side) const {
    if (points_.empty()) {
        return 0;
    }
    const Point3 half = Point3::Constant(0.5 * side);
    const Point3 lo = center - half;
    const Point3 hi = center + half;
    std::size_t count = 0;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if ((node.hi.array() < lo.array()).any() || (node.lo.array() > hi.array()).any()) {
            continue;
        }
        if ((node.lo.array() >= lo.array()).all() && (node.hi.array() <= hi.array()).all()) {
            count += node.end - node.begin;
            continue;
        }
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                count += in_cube(points_[order_[i]], lo, hi) ? 1 : 0;
            }
            continue;
        }
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    return count;
}

std::vector<std::size_t> SpatialIndex::cube_collect(const Point3& center, double side) const {
    std::vector<std::size_t> out;
    if (points_.empty()) {
        return out;
    }
    const Point3 half = Point3::Constant(0.5 * side);
    const Point3 lo = center - half;
    const Point3 hi = center + half;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if ((node.hi.array() < lo.array()).any() || (node.lo.array() > hi.array()).any()) {
            continue;
        }
        if (node.left < 0) {
            for (auto i = node.begin; i < node.end; ++i) {
                if (in_cube(points_[order_[i]], lo, hi)) {
                    out.push_back(order_[i]);
                }
            }
            continue;
        }
        stack.push_back(node.left);
        stack.push_back(node.right);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double average_nn_distance(const PointCloud& cloud) {
    if (cloud.size() < 2) {
        throw InvalidArgument("average nearest-neighbor distance needs at least two points");
    }
    return average_nn_distance(cloud, SpatialIndex(cloud));
}

double average_nn_distance(const PointCloud& cloud, const SpatialIndex& index) {
    if (cloud.size() < 2) {
        throw InvalidArgument("average nearest-neighbor distance needs at least two points");
    }
    double sum = 0.0;
    for (const auto& p : cloud.points) {
        // Coincident duplicates are skipped; widen k until a distinct point shows up.
        double best = 0.0;
        for (std::size_t k = 2; best == 0.0; k *= 2) {
            const auto nn = index.knn(p, k);
            for (const auto& n : nn) {
                if (n.distance_sq > 0.0) {
                    best = std::sqrt(n.distance_sq);
                    break;
                }
            }
            if (best == 0.0 && nn.size() < k) {
                throw DegenerateInput("all points coincide; nearest-neighbor spacing undefined");
            }
        }
        sum += best;
    }
    return sum / static_cast<double>(cloud.size());
}

}  // namespace symcomplete
