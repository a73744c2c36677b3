#include "oracles.hpp"

#include "symcomplete/augment.hpp"
#include "symcomplete/error.hpp"
#include "symcomplete/fixtures.hpp"
#include "symcomplete/io.hpp"
#include "symcomplete/spatial_index.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

using namespace symcomplete;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("symcomplete_augment_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("region count bounds") {
    CHECK(DamageSpec{0.20, 0}.region_count_low() == 14);
    CHECK(DamageSpec{0.20, 0}.region_count_high() == 19);
    // floor(0.7 * 5) = 3, ceil(0.95 * 5) = 5, floor(0.7 * 45) = 31, ceil(0.95 * 45) = 43.
    CHECK(DamageSpec{0.05, 0}.region_count_low() == 3);
    CHECK(DamageSpec{0.05, 0}.region_count_high() == 5);
    CHECK(DamageSpec{0.45, 0}.region_count_low() == 31);
    CHECK(DamageSpec{0.45, 0}.region_count_high() == 43);
    CHECK(DamageSpec{0.35, 0}.region_count_high() == 34);  // 33.25 rounds up
    CHECK(DamageSpec{0.01, 0}.region_count_low() == 1);
    CHECK_THROWS_AS((DamageSpec{0.0, 0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((DamageSpec{1.0, 0}.validate()), InvalidArgument);
}

TEST_CASE("damage at 5% of 16384 points") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Box, 16384, RigidTransform::identity(), 1});
    const auto rec = damage(fx.cloud, {0.05, 1});
    CHECK(rec.removed_indices.size() == 819);
    CHECK(std::abs(rec.achieved_rate - 0.05) <= kDamageRateTolerance);
    CHECK(rec.regions.size() >= 3);
    CHECK(rec.regions.size() <= 5);
}

TEST_CASE("damage partitions the cloud") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Wedge, 4000, RigidTransform::identity(), 2});
    for (double dr = 0.05; dr < 0.46; dr += 0.05) {
        const DamageSpec spec{dr, 7};
        const auto rec = damage(fx.cloud, spec);
        CHECK(std::is_sorted(rec.removed_indices.begin(), rec.removed_indices.end()));
        CHECK(std::adjacent_find(rec.removed_indices.begin(), rec.removed_indices.end()) == rec.removed_indices.end());
        CHECK(rec.damaged.size() + rec.removed_indices.size() == fx.cloud.size());

        std::multiset<std::array<double, 3>> a, b;
        for (const auto& p : fx.cloud.points) a.insert({p.x(), p.y(), p.z()});
        for (const auto& p : rec.damaged.points) b.insert({p.x(), p.y(), p.z()});
        for (auto i : rec.removed_indices) b.insert({fx.cloud.points[i].x(), fx.cloud.points[i].y(), fx.cloud.points[i].z()});
        CHECK(a == b);

        std::size_t from_regions = 0, local = 0;
        for (const auto& r : rec.regions) {
            from_regions += r.removed.size();
            for (auto i : r.removed) local += (fx.cloud.points[i] - r.center).norm() <= 2.0 * r.radius + 1e-12;
        }
        CHECK(from_regions == rec.removed_indices.size());
        CHECK(double(local) >= 0.95 * double(from_regions));
        CHECK(rec.regions.size() >= spec.region_count_low());
        CHECK(rec.regions.size() <= spec.region_count_high());
        CHECK(rec.region_centers.size() == rec.regions.size());
    }
}

TEST_CASE("damage is deterministic and seed-sensitive") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Ellipsoid, 3000, RigidTransform::identity(), 3});
    const auto a = damage(fx.cloud, {0.3, 11}), b = damage(fx.cloud, {0.3, 11}), c = damage(fx.cloud, {0.3, 12});
    CHECK(a.removed_indices == b.removed_indices);
    CHECK(a.removed_indices != c.removed_indices);
}

TEST_CASE("infeasible damage throws") {
    std::mt19937_64 rng(4);
    const PointCloud tiny(oracle::random_points(rng, 20));
    CHECK_THROWS_AS(damage(tiny, {0.45, 0}), InvalidArgument);
}

TEST_CASE("seed derivation and stems") {
    CHECK(derive_seed(1, "a.ply", 0.05) == derive_seed(1, "a.ply", 0.05));
    CHECK(derive_seed(1, "a.ply", 0.05) != derive_seed(1, "b.ply", 0.05));
    CHECK(derive_seed(1, "a.ply", 0.05) != derive_seed(1, "a.ply", 0.10));
    CHECK(derive_seed(1, "a.ply", 0.05) != derive_seed(2, "a.ply", 0.05));
    CHECK(damaged_stem("chair", 0.05) == "chair__dr05");
    CHECK(damaged_stem("chair", 0.45) == "chair__dr45");
    CHECK(damaged_stem("chair", 0.125) == "chair__dr12p5");
}

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sidecar records the spec and regions") {
    const auto fx = fixtures::generate({fixtures::ShapeKind::Box, 2000, RigidTransform::identity(), 5});
    const DamageSpec spec{0.1, 5};
    const auto rec = damage(fx.cloud, spec);
    const auto j = json::parse(damage_sidecar_json(rec, spec, fx.cloud.size()));
    CHECK(j["rate"] == 0.1);
    CHECK(j["seed"] == 5);
    CHECK(j["regions"].size() == rec.regions.size());
    std::size_t removed = 0;
    for (const auto& r : j["regions"]) removed += r["removed"].size();
    CHECK(removed == rec.removed_indices.size());
    CHECK(j["original_count"] == 2000);
}

TEST_CASE("batch damage writes outputs, sidecars and a manifest") {
    const auto in = fresh_dir("in"), out1 = fresh_dir("out1"), out2 = fresh_dir("out2");
    for (int i = 0; i < 3; ++i) {
        const auto fx = fixtures::generate({fixtures::kSymmetricKinds[i], 2500, RigidTransform::identity(), std::uint64_t(i)});
        io::save_cloud(fx.cloud, in / ("shape" + std::to_string(i) + (i == 2 ? ".xyz" : ".ply")),
                       i == 2 ? io::Format::Xyz : io::Format::PlyBinaryLE);
    }
    std::ofstream(in / "broken.ply") << "ply\nnonsense\n";
    std::ofstream(in / "notes.md") << "ignored\n";

    const std::vector<double> rates{0.05, 0.25, 0.45};
    const auto s1 = damage_batch(in, out1, rates, 9, 1);
    const auto s2 = damage_batch(in, out2, rates, 9, 3);
    CHECK(s1.failures == 3);  // one per requested rate
    std::size_t clouds = 0, sidecars = 0;
    for (const auto& e : std::filesystem::directory_iterator(out1)) {
        const auto ext = e.path().extension();
        clouds += ext == ".ply" || ext == ".xyz";
        sidecars += ext == ".json" && e.path().filename() != "manifest.json";
    }
    CHECK(clouds == 9);
    CHECK(sidecars == 9);
    CHECK(std::filesystem::exists(out1 / "manifest.json"));

    REQUIRE(s1.entries.size() == s2.entries.size());
    for (std::size_t i = 0; i < s1.entries.size(); ++i) {
        CHECK(s1.entries[i].checksum == s2.entries[i].checksum);
        if (!s1.entries[i].output.empty()) {
            CHECK(sha256_hex(slurp(out1 / s1.entries[i].output)) == s1.entries[i].checksum);
            const auto side = json::parse(slurp(out1 / s1.entries[i].sidecar));
            const double measured = double(side["removed_count"]) / double(side["original_count"]);
            CHECK(std::abs(measured - s1.entries[i].rate) <= kDamageRateTolerance);
        }
    }
    const auto manifest = json::parse(slurp(out1 / "manifest.json"));
    REQUIRE(manifest.is_array());
    CHECK(manifest.size() == 12);
    std::size_t errors = 0;
    for (const auto& e : manifest) errors += e.contains("error");
    CHECK(errors == 3);
    CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));
}
