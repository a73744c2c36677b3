#include "symcomplete/augment.hpp"

#include "symcomplete/error.hpp"
#include "symcomplete/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace symcomplete {

namespace fs = std::filesystem;

namespace {

// Rate scaled so DR_pct * 1e6 is an exact integer for rates given to 8 decimals.
long long rate_micro_percent(double rate) { return std::llround(rate * 1e8); }

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Splits `total` into parts proportional to `weights` (largest remainder),
// every part at least 1.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
    const std::size_t h = weights.size();
    std::vector<std::size_t> parts(h, 1);
    const std::size_t spare = total - h;
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t given = 0;
    for (std::size_t i = 0; i < h; ++i) {
        const double exact = static_cast<double>(spare) * weights[i] / sum;
        const auto whole = static_cast<std::size_t>(std::floor(exact));
        parts[i] += whole;
        given += whole;
        remainders.emplace_back(exact - static_cast<double>(whole), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; given < spare; ++k, ++given) {
        ++parts[remainders[k % h].second];
    }
    return parts;
}

}  // namespace

std::size_t DamageSpec::region_count_low() const {
    const long long m = rate_micro_percent(damage_rate);
    const long long low = (7 * m) / 10'000'000LL;
    return static_cast<std::size_t>(std::max(1LL, low));
}

std::size_t DamageSpec::region_count_high() const {
    const long long m = rate_micro_percent(damage_rate);
    const long long high = (95 * m + 100'000'000LL - 1) / 100'000'000LL;
    return static_cast<std::size_t>(std::max<long long>(high, static_cast<long long>(region_count_low())));
}

void DamageSpec::validate() const {
    if (!(damage_rate > 0.0 && damage_rate < 1.0)) {
        throw InvalidArgument("damage_rate must lie in (0, 1)");
    }
}

DamageRecord damage(const PointCloud& cloud, const DamageSpec& spec) {
    spec.validate();
    cloud.validate();
    const std::size_t n = cloud.size();
    const auto target = static_cast<std::size_t>(std::llround(spec.damage_rate * static_cast<double>(n)));
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick_h(spec.region_count_low(), spec.region_count_high());
    const std::size_t h = pick_h(rng);
    if (target < h || h > n) {
        throw InvalidArgument("infeasible damage spec: " + std::to_string(h) + " regions but only " +
                              std::to_string(target) + " points to remove from " + std::to_string(n));
    }

    // Seeds: partial Fisher-Yates.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < h; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::vector<std::size_t> seeds(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(h));

    std::gamma_distribution<double> gamma(kRegionSizeConcentration, 1.0);
    std::vector<double> weights(h);
    for (auto& w : weights) {
        w = gamma(rng);
    }
    const auto sizes = apportion(target, weights);

    // Each region visits points in order of distance from its seed.
    std::vector<std::vector<std::size_t>> queues(h);
    for (std::size_t r = 0; r < h; ++r) {
        const Point3& c = cloud.points[seeds[r]];
        std::vector<std::pair<double, std::size_t>> by_distance(n);
        for (std::size_t i = 0; i < n; ++i) {
            by_distance[i] = {(cloud.points[i] - c).squaredNorm(), i};
        }
        const std::size_t need = std::min(n, target + 1);
        std::partial_sort(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(need),
                          by_distance.end());
        queues[r].reserve(need);
        for (std::size_t k = 0; k < need; ++k) {
            queues[r].push_back(by_distance[k].second);
        }
    }

    DamageRecord record;
    record.regions.resize(h);
    std::vector<char> removed(n, 0);
    std::vector<std::size_t> cursor(h, 0);
    std::size_t total = 0;
    bool progressed = true;
    while (total < target && progressed) {
        progressed = false;
        for (std::size_t r = 0; r < h && total < target; ++r) {
            auto& region = record.regions[r];
            if (region.removed.size() >= sizes[r]) continue;
            while (cursor[r] < queues[r].size() && removed[queues[r][cursor[r]]]) {
                ++cursor[r];
            }
            if (cursor[r] == queues[r].size()) continue;
            const std::size_t idx = queues[r][cursor[r]++];
            removed[idx] = 1;
            region.removed.push_back(idx);
            ++total;
            progressed = true;
        }
    }

    for (std::size_t r = 0; r < h; ++r) {
        auto& region = record.regions[r];
        region.center = cloud.points[seeds[r]];
        for (auto idx : region.removed) {
            region.radius = std::max(region.radius, (cloud.points[idx] - region.center).norm());
        }
        record.region_centers.push_back(region.center);
    }
    std::vector<std::size_t> kept;
    kept.reserve(n - total);
    for (std::size_t i = 0; i < n; ++i) {
        (removed[i] ? record.removed_indices : kept).push_back(i);
    }
    record.damaged = select(cloud, kept);
    record.achieved_rate = static_cast<double>(total) / static_cast<double>(n);
    if (std::abs(record.achieved_rate - spec.damage_rate) > kDamageRateTolerance) {
        throw InvalidArgument("damage could not reach the requested rate");
    }
    return record;
}

std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& file_name, double rate) {
    const auto rate_key = static_cast<std::uint64_t>(rate_micro_percent(rate));
    return splitmix64(splitmix64(master_seed ^ fnv1a(file_name)) ^ rate_key);
}

std::string damaged_stem(const std::string& input_stem, double rate) {
    const double pct = rate * 100.0;
    char buf[32];
    if (std::abs(pct - std::round(pct)) < 1e-9) {
        std::snprintf(buf, sizeof buf, "__dr%02lld", std::llround(pct));
    } else {
        std::snprintf(buf, sizeof buf, "__dr%g", pct);
        for (char* c = buf; *c; ++c) {
            if (*c == '.') *c = 'p';
        }
    }
    return input_stem + buf;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string damage_sidecar_json(const DamageRecord& record, const DamageSpec& spec, std::size_t original_size) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : record.regions) {
        regions.push_back({{"center", {r.center.x(), r.center.y(), r.center.z()}},
                           {"removed", r.removed},
                           {"radius", r.radius}});
    }
    const nlohmann::json doc = {
        {"rate", spec.damage_rate},
        {"seed", spec.seed},
        {"regions", regions},
        {"region_count_bounds", {spec.region_count_low(), spec.region_count_high()}},
        {"original_count", original_size},
        {"removed_count", record.removed_indices.size()},
        {"achieved_rate", record.achieved_rate},
        {"tolerance", kDamageRateTolerance},
    };
    return doc.dump(2) + "\n";
}

BatchSummary damage_batch(const fs::path& dir_in, const fs::path& dir_out, const std::vector<double>& rates,
                          std::uint64_t seed, std::size_t jobs) {
    if (rates.empty()) {
        throw InvalidArgument("no damage rates given");
    }
    for (double r : rates) {
        DamageSpec{r, 0}.validate();
    }
    if (!fs::is_directory(dir_in)) {
        throw InvalidArgument("input directory does not exist: " + dir_in.string());
    }
    fs::create_directories(dir_out);

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(dir_in)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".ply" || ext == ".xyz" || ext == ".txt")) {
            inputs.push_back(entry.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());

    std::vector<std::vector<BatchEntry>> per_file(inputs.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t f = next++; f < inputs.size(); f = next++) {
            const fs::path& in = inputs[f];
            const std::string name = in.filename().string();
            io::CloudFile file;
            try {
                file = io::load_cloud(in);
            } catch (const std::exception& e) {
                {
                    std::lock_guard lock(log_mutex);
                    std::cerr << "augment: skipping " << name << ": " << e.what() << "\n";
                }
                for (double rate : rates) {
                    per_file[f].push_back({name, "", "", rate, "", 0.0, e.what()});
                }
                continue;
            }
            for (double rate : rates) {
                BatchEntry entry{name, "", "", rate, "", 0.0, ""};
                try {
                    const DamageSpec spec{rate, derive_seed(seed, name, rate)};
                    const auto record = damage(file.cloud, spec);
                    const std::string stem = damaged_stem(in.stem().string(), rate);
                    const fs::path out = dir_out / (stem + in.extension().string());
                    const fs::path sidecar = dir_out / (stem + ".json");
                    const std::string bytes = io::serialize_cloud(record.damaged, file.format);
                    std::ofstream(out, std::ios::binary) << bytes;
                    std::ofstream(sidecar) << damage_sidecar_json(record, spec, file.cloud.size());
                    entry.output = out.filename().string();
                    entry.sidecar = sidecar.filename().string();
                    entry.checksum = sha256_hex(bytes);
                    entry.achieved_rate = record.achieved_rate;
                } catch (const std::exception& e) {
                    entry.error = e.what();
                    std::lock_guard lock(log_mutex);
                    std::cerr << "augment: " << name << " at rate " << rate << ": " << e.what() << "\n";
                }
                per_file[f].push_back(std::move(entry));
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, inputs.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    BatchSummary summary;
    nlohmann::json manifest = nlohmann::json::array();
    for (auto& entries : per_file) {
        for (auto& e : entries) {
            nlohmann::json item = {{"input", e.input}, {"rate", e.rate}};
            if (e.error.empty()) {
                item["output"] = e.output;
                item["sidecar"] = e.sidecar;
                item["checksum"] = e.checksum;
                item["achieved_rate"] = e.achieved_rate;
            } else {
                item["output"] = nullptr;
                item["checksum"] = nullptr;
                item["error"] = e.error;
                ++summary.failures;
            }
            manifest.push_back(std::move(item));
            summary.entries.push_back(std::move(e));
        }
    }
    summary.manifest = dir_out / "manifest.json";
    std::ofstream(summary.manifest) << manifest.dump(2) << "\n";
    return summary;
}

}  // namespace symcomplete
