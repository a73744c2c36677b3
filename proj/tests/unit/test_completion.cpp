#include "oracles.hpp"
#include "suites.hpp"

#include "symcomplete/augment.hpp"
#include "symcomplete/completion.hpp"
#include "symcomplete/error.hpp"
#include "symcomplete/fixtures.hpp"

#include <doctest.h>

#include <limits>

using namespace symcomplete;

namespace {

struct CarvedBall {
    PointCloud full;
    PointCloud carved;
    Plane plane;
    Point3 center;
    double radius = 0.0;
};

/// Symmetric box with one ball removed on the positive side of its plane.
CarvedBall carved_ball(std::uint64_t seed) {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Box, 8192, RigidTransform::identity(), seed});
    CarvedBall out{fx.cloud, {}, *fx.plane, {}, 0.0};
    const auto box = bounding_box(fx.cloud);
    // A point on the +x face, away from the plane.
    out.center = Point3(box.max_corner.x(), 0.5 * (box.min_corner.y() + box.max_corner.y()), box.max_corner.z());
    out.radius = 0.25 * box.extent().minCoeff();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < fx.cloud.size(); ++i) {
        if ((fx.cloud.points[i] - out.center).norm() > out.radius) keep.push_back(i);
    }
    out.carved = select(fx.cloud, keep);
    return out;
}

BalanceConfig balance_for(const PointCloud& c) { return default_balance_config(average_nn_distance(c)); }

}  // namespace

TEST_CASE("no holes against a perfect overlap") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Wedge, 2000, RigidTransform::identity(), 1});
    CHECK(detect_holes(fx.cloud, fx.cloud, balance_for(fx.cloud)).empty());
    CHECK(detect_holes(fx.cloud, reflect(fx.cloud, *fx.plane), balance_for(fx.cloud)).empty());
}

TEST_CASE("holes concentrate in the carved region") {
    const auto c = carved_ball(2);
    const auto mirror = reflect(c.carved, c.plane);
    const auto cfg = balance_for(c.carved);
    const auto holes = detect_holes(c.carved, mirror, cfg);
    REQUIRE(holes.size() > 50);
    std::size_t inside = 0;
    for (const auto& p : holes.points) inside += (p - c.center).norm() <= 1.5 * c.radius;
    CHECK(double(inside) >= 0.9 * double(holes.size()));

    // Every hole is unbalanced with a mirror majority, checked by brute force.
    const auto idx = detect_hole_indices(c.carved, mirror, cfg);
    std::vector<std::size_t> brute;
    for (std::size_t i = 0; i < mirror.size(); ++i) {
        const auto a = oracle::cube_count(c.carved.points, mirror.points[i], cfg.cube_side);
        const auto b = oracle::cube_count(mirror.points, mirror.points[i], cfg.cube_side);
        if (!oracle::balanced(a, b, cfg.epsilon) && b > a) brute.push_back(i);
    }
    CHECK(idx == brute);

    // Re-running detection after filling leaves far fewer holes.
    const auto filled = fill(c.carved, holes);
    const auto again = detect_holes(filled, reflect(filled, c.plane), cfg);
    CHECK(double(again.size()) <= 0.2 * double(holes.size()));
}

TEST_CASE("fill concatenates in order") {
    std::mt19937_64 rng(3);
    const PointCloud p(oracle::random_points(rng, 1000)), h(oracle::random_points(rng, 150));
    const auto out = fill(p, h);
    CHECK(out.size() == 1150);
    CHECK(std::equal(p.points.begin(), p.points.end(), out.points.begin()));
    CHECK(fill(p, PointCloud()).points == p.points);
}

TEST_CASE("skip validation") {
    const auto c = carved_ball(4);
    CHECK(skip_validate(c.carved, c.carved, 0.0));
    CHECK(scaled_chamfer(c.carved, c.carved) == 0.0);

    PointCloud garbage = c.carved;
    const double diag = bounding_box(c.carved).diagonal();
    for (int i = 0; i < 50; ++i) garbage.points.push_back(Point3(100 * diag, i, 0));
    CHECK_FALSE(skip_validate(c.carved, garbage, kDefaultSkipThreshold));

    const auto filled = fill(c.carved, detect_holes(c.carved, reflect(c.carved, c.plane), balance_for(c.carved)));
    const double v = scaled_chamfer(c.carved, filled);
    REQUIRE(v > 0.0);
    for (double k = 0.1; k <= 3.0; k += 0.1) CHECK(skip_validate(c.carved, filled, k * v) == (k * v >= v));
    CHECK(skip_validate(c.carved, filled, v));
    CHECK_FALSE(skip_validate(c.carved, filled, std::nextafter(v, 0.0)));
}

TEST_CASE("config problems are reported per field") {
    CompletionConfig cfg;
    CHECK(cfg.problems().empty());
    cfg.balance.epsilon = 1.5;
    cfg.passes = 0;
    cfg.skip_threshold = -1;
    cfg.normal_params.neighbor_count = 2;
    const auto p = cfg.problems();
    CHECK(p.size() == 4);
    CHECK(p[0].rfind("balance.epsilon", 0) == 0);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);

    CompletionConfig custom;
    custom.registration.voxel_size = 0.2;
    const auto r = resolve_config(custom, 0.01);
    CHECK(r.registration.fpfh_radius == doctest::Approx(1.0));
    CHECK(r.registration.icp_distance_threshold == doctest::Approx(0.3));
    CHECK(r.balance.cube_side == doctest::Approx(0.04));
    const auto d = resolve_config(CompletionConfig{}, 0.01);
    CHECK(d.registration.voxel_size == doctest::Approx(0.025));
}

TEST_CASE("complete rejects tiny inputs") {
    std::mt19937_64 rng(5);
    CHECK_THROWS_AS(complete(PointCloud(oracle::random_points(rng, 99)), {}), InvalidArgument);
    CompletionConfig bad;
    bad.balance.epsilon = 0.0;
    CHECK_THROWS_AS(complete(PointCloud(oracle::random_points(rng, 200)), bad), InvalidArgument);
}

TEST_CASE("complete on an undamaged symmetric cloud adds almost nothing") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::CompositeSymmetric, 4096, fixtures::canonical_pose(6), 6});
    const auto r = complete(fx.cloud, {});
    CHECK_FALSE(r.skipped);
    CHECK(double(r.added_points.size()) < 0.01 * double(fx.cloud.size()));
    CHECK(r.diagnostics.candidates.size() == 6);
}

TEST_CASE("complete repairs one-sided damage") {
    for (std::uint64_t seed = 7; seed < 11; ++seed) {
        const auto kind = fixtures::kSymmetricKinds[seed % 4];
        const auto fx = fixtures::generate({kind, 8192, fixtures::canonical_pose(seed), seed});
        const auto rec = damage(fx.cloud, {0.15, seed});
        CompletionConfig cfg;
        cfg.seed = seed;
        const auto r = complete(rec.damaged, cfg);
        CAPTURE(fixtures::to_string(kind));
        CHECK_FALSE(r.skipped);
        CHECK(chamfer_distance(r.completed, fx.cloud) < chamfer_distance(rec.damaged, fx.cloud));

        // P is a prefix of P*, and added_points is the rest.
        REQUIRE(r.completed.size() == rec.damaged.size() + r.added_points.size());
        CHECK(std::equal(rec.damaged.points.begin(), rec.damaged.points.end(), r.completed.points.begin()));
        CHECK(std::equal(r.added_points.points.begin(), r.added_points.points.end(),
                         r.completed.points.begin() + std::ptrdiff_t(rec.damaged.size())));

        // Each added point was unbalanced with a mirror majority.
        const PointCloud mirror = reflect(rec.damaged, r.plane);
        const SpatialIndex ip(rec.damaged), im(mirror);
        const BalanceConfig bc{r.diagnostics.cube_side, kDefaultEpsilon};
        for (const auto& x : r.added_points.points) {
            const auto c = is_balanced(x, ip, im, bc);
            CHECK((!c.balanced && c.in_second > c.in_first));
        }

        // Against the same plane, the completed cloud has few holes left.
        const auto left = detect_hole_indices(r.completed, reflect(r.completed, r.plane), bc);
        CHECK(double(left.size()) <= 0.2 * double(std::max<std::size_t>(r.added_points.size(), 1)));
    }
}

TEST_CASE("asymmetric blob is skipped") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::AsymmetricBlob, 8192, RigidTransform::identity(), 12});
    const auto r = complete(fx.cloud, {});
    CHECK(r.skipped);
    CHECK(r.diagnostics.scaled_chamfer > kDefaultSkipThreshold);
    CHECK(r.completed.points == fx.cloud.points);
    CHECK(r.added_points.empty());
}

TEST_CASE("skip threshold extremes") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Wedge, 4096, fixtures::canonical_pose(13), 13});
    const auto rec = damage(fx.cloud, {0.25, 13});
    CompletionConfig zero;
    zero.skip_threshold = 0.0;
    const auto z = complete(rec.damaged, zero);
    CHECK(z.skipped);
    CHECK(z.completed.points == rec.damaged.points);
    CompletionConfig inf;
    inf.skip_threshold = std::numeric_limits<double>::infinity();
    const auto i = complete(rec.damaged, inf);
    CHECK_FALSE(i.skipped);
    CHECK(i.added_points.size() == i.diagnostics.raw_added);
}

TEST_CASE("complete is deterministic") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Ellipsoid, 4096, fixtures::canonical_pose(14), 14});
    const auto rec = damage(fx.cloud, {0.3, 14});
    CompletionConfig cfg;
    cfg.seed = 99;
    const auto a = complete(rec.damaged, cfg), b = complete(rec.damaged, cfg);
    CHECK(a.completed.points == b.completed.points);
    CHECK(a.completed.normals == b.completed.normals);
    CHECK(a.plane.normal == b.plane.normal);
    CHECK(a.plane.anchor == b.plane.anchor);
    CHECK(a.diagnostics.scaled_chamfer == b.diagnostics.scaled_chamfer);
    CHECK(a.diagnostics.registration.fitness == b.diagnostics.registration.fitness);
}

TEST_CASE("extra passes") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Box, 4096, fixtures::canonical_pose(15), 15});
    const auto rec = damage(fx.cloud, {0.2, 15});
    CompletionConfig cfg;
    cfg.passes = 3;
    const auto r = complete(rec.damaged, cfg);
    CHECK(r.diagnostics.passes_run >= 1);
    CHECK(r.diagnostics.passes_run <= 3);
}
