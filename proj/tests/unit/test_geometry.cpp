#include "oracles.hpp"

#include "symcomplete/error.hpp"
#include "symcomplete/geometry.hpp"
#include "symcomplete/spatial_index.hpp"

#include <doctest.h>

#include <limits>

using namespace symcomplete;

TEST_CASE("bounding box extremes") {
    const auto box = bounding_box(PointCloud({{0, 0, 0}, {1, 2, 3}}));
    CHECK(box.min_corner == Point3(0, 0, 0));
    CHECK(box.max_corner == Point3(1, 2, 3));

    const auto single = bounding_box(PointCloud({{5, 5, 5}}));
    CHECK(single.min_corner == single.max_corner);

    std::mt19937_64 rng(7);
    std::vector<Point3> pts;
    while (pts.size() < 1000) {
        const Point3 p = oracle::random_points(rng, 1)[0];
        if (p.norm() <= 1.0) pts.push_back(p);
    }
    Point3 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const auto b = bounding_box(PointCloud(pts));
    CHECK(b.min_corner == lo);
    CHECK(b.max_corner == hi);

    CHECK_THROWS_WITH_AS(bounding_box(PointCloud()), "empty point cloud", InvalidArgument);
}

TEST_CASE("bbox centroid is the midpoint") {
    CHECK(bbox_centroid({{0, 0, 0}, {2, 4, 6}}) == Point3(1, 2, 3));
    CHECK(bbox_centroid({{3, 1, 2}, {3, 1, 2}}) == Point3(3, 1, 2));
    CHECK(bbox_centroid({{-1, -1, -1}, {1, 1, 1}}) == Point3::Zero());
}

TEST_CASE("mass center") {
    CHECK(mass_center(PointCloud({{0, 0, 0}, {2, 0, 0}})) == Point3(1, 0, 0));
    CHECK_THROWS_AS(mass_center(PointCloud()), InvalidArgument);

    std::mt19937_64 rng(11);
    const auto pts = oracle::random_points(rng, 500);
    Point3 sum = Point3::Zero();
    for (const auto& p : pts) sum += p;
    CHECK((mass_center(PointCloud(pts)) - sum / 500.0).norm() <= 1e-9);

    const Plane plane = Plane::from_point_normal(Point3::Zero(), oracle::random_unit(rng));
    const PointCloud both = concatenate(PointCloud(pts), reflect(PointCloud(pts), plane));
    CHECK(std::abs(plane.signed_distance(mass_center(both))) <= 1e-9);
}

TEST_CASE("reflection about a plane") {
    const Plane yz{Point3::Zero(), Vec3::UnitX()};
    CHECK(reflect_point({1, 0, 0}, yz) == Point3(-1, 0, 0));
    CHECK(reflect_point({0, 3, -2}, yz) == Point3(0, 3, -2));

    PointCloud c({{1, 2, 3}}, {Vec3(1, 0, 0)});
    const auto r = reflect(c, yz);
    CHECK(r.points[0] == Point3(-1, 2, 3));
    CHECK(r.normals[0] == Vec3(-1, 0, 0));

    CHECK_THROWS_AS(reflect(c, Plane{Point3::Zero(), Vec3(2, 0, 0)}), InvalidArgument);
    CHECK_THROWS_AS(Plane::from_point_normal(Point3::Zero(), Vec3::Zero()), InvalidArgument);
    CHECK(Plane::from_point_normal(Point3::Zero(), Vec3(0, 0, 5)).normal == Vec3::UnitZ());
}

TEST_CASE("rigid transforms") {
    PointCloud c({{0, 0, 0}, {1, 2, 3}}, {Vec3::UnitX(), Vec3::UnitY()});
    const auto same = apply_transform(c, RigidTransform::identity());
    CHECK(same.points == c.points);
    CHECK(same.normals == c.normals);

    const auto moved = apply_transform(PointCloud({{0, 0, 0}}), {Mat3::Identity(), Vec3(1, 0, 0)});
    CHECK(moved.points[0] == Point3(1, 0, 0));

    std::mt19937_64 rng(3);
    const RigidTransform t{oracle::random_rotation(rng), Vec3(0.3, -2, 5)};
    const auto back = apply_transform(c, t.compose(t.inverse()));
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK((back.points[i] - c.points[i]).norm() <= 1e-9);
        CHECK((back.normals[i] - c.normals[i]).norm() <= 1e-9);
    }
    const auto rotated = apply_transform(c, t);
    CHECK((rotated.normals[1] - t.rotation * Vec3::UnitY()).norm() <= 1e-15);
    CHECK(t.is_valid());
    CHECK_FALSE(RigidTransform{2.0 * Mat3::Identity(), Vec3::Zero()}.is_valid());
    CHECK_FALSE(RigidTransform{Mat3(Eigen::Vector3d(-1, 1, 1).asDiagonal()), Vec3::Zero()}.is_valid());
}

TEST_CASE("cloud validation") {
    CHECK_NOTHROW(PointCloud({{0, 0, 0}}, {Vec3::UnitZ()}).validate());
    CHECK_THROWS_AS(PointCloud({{0, 0, 0}}, {Vec3(0, 0, 2)}).validate(), InvalidArgument);
    CHECK_THROWS_AS(PointCloud({{0, 0, 0}, {1, 1, 1}}, {Vec3::UnitZ()}).validate(), InvalidArgument);
    CHECK_THROWS_AS(PointCloud({{std::numeric_limits<double>::quiet_NaN(), 0, 0}}).validate(), InvalidArgument);
}

TEST_CASE("concatenate and select") {
    const PointCloud a({{0, 0, 0}, {1, 0, 0}}), b({{2, 0, 0}});
    const auto ab = concatenate(a, b);
    REQUIRE(ab.size() == 3);
    CHECK(ab.points[2] == Point3(2, 0, 0));
    const auto s = select(ab, {2, 0});
    CHECK(s.points == std::vector<Point3>{{2, 0, 0}, {0, 0, 0}});
}

TEST_CASE("spatial index basics") {
    std::mt19937_64 rng(5);
    const auto pts = oracle::random_points(rng, 2000);
    const SpatialIndex index(pts);
    const auto nn = index.knn(pts[17], 1);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0].index == 17);
    CHECK(nn[0].distance_sq == 0.0);
    CHECK(index.radius(pts[0], std::numeric_limits<double>::infinity()).size() == pts.size());
    CHECK(index.knn(pts[0], 5000).size() == pts.size());

    for (int q = 0; q < 100; ++q) {
        const Point3 query = oracle::random_points(rng, 1)[0];
        const auto got = index.knn(query, 5);
        const auto want = oracle::knn(pts, query, 5);
        REQUIRE(got.size() == 5);
        for (int i = 0; i < 5; ++i) CHECK(got[i].index == want[i].second);
    }
}

TEST_CASE("spatial index ties resolve by index") {
    const std::vector<Point3> pts{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {1, 0, 0}};
    const SpatialIndex index(pts, 1);
    const auto nn = index.knn(Point3::Zero(), 4);
    CHECK(nn[0].index == 0);
    CHECK(nn[1].index == 1);
    CHECK(nn[2].index == 2);
    CHECK(nn[3].index == 3);
    CHECK(index.cube_count(Point3::Zero(), 2.0) == 4);  // closed cube: boundary counts
    CHECK(index.cube_count(Point3::Zero(), 1.999) == 0);
}

TEST_CASE("average nearest-neighbour distance") {
    CHECK(average_nn_distance(PointCloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}})) == doctest::Approx(1.0));
    CHECK(average_nn_distance(PointCloud({{0, 0, 0}, {7, 0, 0}})) == doctest::Approx(7.0));
    CHECK_THROWS(average_nn_distance(PointCloud({{0, 0, 0}})));
    CHECK_THROWS(average_nn_distance(PointCloud({{1, 1, 1}, {1, 1, 1}})));

    std::mt19937_64 rng(13);
    const auto pts = oracle::random_points(rng, 300);
    double sum = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = INFINITY;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j != i) best = std::min(best, (pts[i] - pts[j]).norm());
        }
        sum += best;
    }
    CHECK(std::abs(average_nn_distance(PointCloud(pts)) - sum / 300.0) <= 1e-9);
}
