#include "oracles.hpp"
#include "suites.hpp"

#include "symcomplete/error.hpp"
#include "symcomplete/normals.hpp"
#include "symcomplete/spatial_index.hpp"

#include <doctest.h>

using namespace symcomplete;

TEST_CASE("planar patch normals") {
    std::mt19937_64 rng(1);
    std::vector<Point3> pts;
    for (int i = 0; i < 500; ++i) pts.emplace_back(suites::uniform(rng, -1, 1), suites::uniform(rng, -1, 1), 0.0);
    const auto est = estimate_normals(PointCloud(pts), {10, Axis{Vec3::UnitZ()}});
    for (const auto& n : est.cloud.normals) CHECK((n - Vec3::UnitZ()).norm() <= 1e-3);
    CHECK(est.count(NormalQuality::Ok) == pts.size());
}

TEST_CASE("sphere normals point at an interior viewpoint") {
    std::mt19937_64 rng(2);
    std::vector<Point3> pts;
    for (int i = 0; i < 2000; ++i) pts.push_back(oracle::random_unit(rng));
    const auto est = estimate_normals(PointCloud(pts), {12, Viewpoint{Point3::Zero()}});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::acos(std::min(1.0, est.cloud.normals[i].dot(-pts[i]))) <= 1e-2 * 10);
    }
}

TEST_CASE("normals match a dense eigensolver per neighbourhood") {
    std::mt19937_64 rng(3);
    std::vector<Point3> pts;
    for (int i = 0; i < 400; ++i) {
        const double x = suites::uniform(rng, -1, 1), y = suites::uniform(rng, -1, 1);
        pts.emplace_back(x, y, 0.3 * std::sin(2 * x) * std::cos(y));
    }
    const std::size_t k = 15;
    const auto est = estimate_normals(PointCloud(pts), {k, Axis{Vec3::UnitZ()}});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto hood = oracle::knn(pts, pts[i], k);
        Point3 mean = Point3::Zero();
        for (const auto& [d, j] : hood) mean += pts[j];
        mean /= double(k);
        Mat3 cov = Mat3::Zero();
        for (const auto& [d, j] : hood) cov += (pts[j] - mean) * (pts[j] - mean).transpose();
        const auto [values, vectors] = oracle::jacobi_eigen(cov);
        Vec3 want = vectors.col(0);
        if (want.z() < 0) want = -want;
        CHECK((est.cloud.normals[i] - want).norm() <= 1e-9);
        CHECK(std::abs(est.cloud.normals[i].norm() - 1.0) <= 1e-9);
    }
}

TEST_CASE("fit_normal oracle suite") {
    const auto t = suites::normals_vs_oracle(4, 300);
    INFO(t.summary());
    CHECK(t.ok());
}

TEST_CASE("degenerate neighbourhoods") {
    NormalQuality q{};
    const Vec3 n = fit_normal({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, &q);
    CHECK(q == NormalQuality::Degenerate);
    CHECK(n == Vec3::UnitZ());
    fit_normal({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}, &q);
    CHECK(q == NormalQuality::LowConfidence);

    std::vector<Point3> pts(20, Point3(1, 2, 3));
    const auto est = estimate_normals(PointCloud(pts), {5, Axis{Vec3::UnitZ()}});
    CHECK(est.count(NormalQuality::Degenerate) == pts.size());
}

TEST_CASE("estimate_normals preconditions") {
    const PointCloud ten(std::vector<Point3>(10, Point3::Zero()));
    CHECK_THROWS_AS(estimate_normals(ten, {10, Axis{}}), InvalidArgument);
    CHECK_THROWS_AS(estimate_normals(ten, {2, Axis{}}), InvalidArgument);
    CHECK_THROWS_AS(estimate_normals(ten, {3, Axis{Vec3(0, 0, 2)}}), InvalidArgument);
}

TEST_CASE("orientation") {
    std::mt19937_64 rng(5);
    PointCloud plane;
    for (int i = 0; i < 50; ++i) {
        plane.points.emplace_back(suites::uniform(rng, -1, 1), suites::uniform(rng, -1, 1), 0.0);
        plane.normals.push_back(i % 2 ? Vec3::UnitZ() : Vec3(-Vec3::UnitZ()));
    }
    const auto up = orient_normals(plane, Axis{Vec3::UnitZ()});
    for (const auto& n : up.normals) CHECK(n == Vec3::UnitZ());
    CHECK(orient_normals(up, Axis{Vec3::UnitZ()}).normals == up.normals);

    const auto cloud = suites::random_cloud(rng, 200, true);
    const Viewpoint vp{Point3(0.3, -2, 1)};
    const auto once = orient_normals(cloud, vp);
    CHECK(orient_normals(once, vp).normals == once.normals);
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once.normals[i].dot(vp.position - once.points[i]) >= 0.0);

    CHECK_THROWS_AS(orient_normals(PointCloud({{0, 0, 0}}), Axis{}), InvalidArgument);
}

TEST_CASE("normal estimation is deterministic") {
    std::mt19937_64 rng(6);
    const PointCloud c(oracle::random_points(rng, 300));
    const auto a = estimate_normals(c, {}), b = estimate_normals(c, {});
    CHECK(a.cloud.normals == b.cloud.normals);
}
