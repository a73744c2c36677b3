#include "cli.hpp"

#include "config.hpp"

#include "symcomplete/augment.hpp"
#include "symcomplete/completion.hpp"
#include "symcomplete/error.hpp"
#include "symcomplete/fixtures.hpp"
#include "symcomplete/io.hpp"
#include "symcomplete/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace symcomplete::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kReportVersion = 1;
constexpr double kCdReportScale = 1e4;

// Failures of a whole command that are the user's fault (bad paths, bad flags
// discovered after parsing); exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json plane_json(const Plane& p) { return {{"anchor", vec_json(p.anchor)}, {"normal", vec_json(p.normal)}}; }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error("expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Plane plane_from_json(const json& j) {
    return Plane::from_point_normal(vec_from_json(j.at("anchor")), vec_from_json(j.at("normal")));
}

json registration_json(const RegistrationResult& r) {
    return {{"fitness", r.fitness}, {"inlier_rmse", r.inlier_rmse}, {"iterations", r.iterations}};
}

json candidate_json(const SymmetryCandidate& c) {
    return {{"source", std::string(to_string(c.source))},
            {"anchor", vec_json(c.plane.anchor)},
            {"normal", vec_json(c.plane.normal)},
            {"score", c.score}};
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw Error("write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open '" + path.string() + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw Error("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

bool is_cloud_file(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".ply" || ext == ".xyz" || ext == ".txt";
}

std::vector<fs::path> list_files(const fs::path& dir, bool (*accept)(const fs::path&)) {
    if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && accept(e.path())) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Runs fn(i) for i in [0, n) on `jobs` threads; exceptions stay inside fn.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    const std::size_t count = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

std::string rate_label(double rate) {
    if (rate < 0.0) return "all";
    std::ostringstream ss;
    ss << std::setprecision(6) << rate * 100.0 << "%";
    return ss.str();
}

// ------------------------------------------------------------ shared options

struct PipelineOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> skip_threshold;
    std::optional<double> epsilon;
    std::optional<double> cube_side;
    std::optional<double> voxel_size;
    std::optional<std::size_t> neighbors;
    std::optional<std::string> orientation;
    std::optional<std::size_t> passes;

    void add_to(CLI::App& app) {
        app.add_option("--config", config_path, "TOML-style config file")->check(CLI::ExistingFile);
        app.add_option("--seed", seed, "RNG seed");
        app.add_option("--epsilon", epsilon, "balance tolerance");
        app.add_option("--cube-side", cube_side, "balance cube side (0 = 4x average spacing)");
        app.add_option("--voxel-size", voxel_size, "registration voxel (0 = 2.5x average spacing)");
        app.add_option("--neighbors", neighbors, "normal estimation k");
        app.add_option("--orientation", orientation, "axis:x,y,z or viewpoint:x,y,z");
    }

    void add_completion_to(CLI::App& app) {
        app.add_option("--skip-threshold", skip_threshold, "skip when CD(P,P*)/s exceeds this");
        app.add_option("--passes", passes, "detect-and-fill passes");
    }

    // Defaults, then the config file, then flags.
    CompletionConfig resolve() const {
        CompletionConfig cfg;
        if (!config_path.empty()) apply_config(load_config_file(config_path), cfg);
        if (seed) cfg.seed = *seed;
        if (skip_threshold) cfg.skip_threshold = *skip_threshold;
        if (epsilon) cfg.balance.epsilon = *epsilon;
        if (cube_side) cfg.balance.cube_side = *cube_side;
        if (voxel_size) cfg.registration.voxel_size = *voxel_size;
        if (neighbors) cfg.normal_params.neighbor_count = *neighbors;
        if (passes) cfg.passes = *passes;
        if (orientation) {
            try {
                cfg.normal_params.orientation = parse_orientation(*orientation);
            } catch (const std::exception& e) {
                throw ConfigError({std::string("--orientation: ") + e.what()});
            }
        }
        auto problems = cfg.problems();
        if (!problems.empty()) throw ConfigError(std::move(problems));
        return cfg;
    }
};

json config_json(const CompletionConfig& c) {
    return {{"epsilon", c.balance.epsilon},
            {"cube_side", c.balance.cube_side},
            {"voxel_size", c.registration.voxel_size},
            {"neighbors", c.normal_params.neighbor_count},
            {"skip_threshold", std::isfinite(c.skip_threshold) ? json(c.skip_threshold) : json("inf")},
            {"passes", c.passes},
            {"seed", c.seed}};
}

// ------------------------------------------------------------------ complete

json diagnostics_json(const std::string& input, const io::CloudFile& file, const CompletionResult& r,
                      const CompletionConfig& cfg) {
    const auto& d = r.diagnostics;
    json candidates = json::array();
    for (const auto& c : d.candidates) candidates.push_back(candidate_json(c));
    return {{"version", kReportVersion},
            {"input", input},
            {"points_in", file.cloud.size()},
            {"points_out", r.completed.size()},
            {"added", r.added_points.size()},
            {"skipped", r.skipped},
            {"skip_reason", r.skipped ? json(r.skip_reason) : json(nullptr)},
            {"plane", plane_json(r.plane)},
            {"initial_plane", plane_json(d.initial_plane)},
            {"plane_refined", d.plane_refined},
            {"candidates", candidates},
            {"registration", registration_json(d.registration)},
            {"global_registration", registration_json(d.global_registration)},
            {"average_spacing", d.average_spacing},
            {"cube_side", d.cube_side},
            {"scaled_chamfer", d.scaled_chamfer},
            {"raw_added", d.raw_added},
            {"config", config_json(cfg)},
            {"notes", d.notes}};
}

struct CompleteArgs {
    std::string input, output, diagnostics;
    bool ascii = false;
    PipelineOptions pipeline;
};

int cmd_complete(const CompleteArgs& a, std::ostream& out) {
    const CompletionConfig cfg = a.pipeline.resolve();
    const auto file = io::load_cloud(a.input);
    for (const auto& w : file.warnings) out << "warning: " << w << "\n";
    const auto result = complete(file.cloud, cfg);
    io::save_cloud(result.completed, a.output, io::format_for_path(a.output, a.ascii));
    if (!a.diagnostics.empty()) {
        write_text(a.diagnostics, diagnostics_json(a.input, file, result, cfg).dump(2) + "\n");
    }
    out << "completed " << file.cloud.size() << " -> " << result.completed.size() << " points";
    if (result.skipped) out << " (skipped: " << result.skip_reason << ")";
    out << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- detect-plane

struct DetectArgs {
    std::string input, output;
    bool candidates_only = false;
    PipelineOptions pipeline;
};

int cmd_detect_plane(const DetectArgs& a, std::ostream& out) {
    const CompletionConfig cfg_in = a.pipeline.resolve();
    const auto file = io::load_cloud(a.input);
    if (file.cloud.size() < kMinimumCompletionSize) {
        throw DegenerateInput("plane detection needs at least " + std::to_string(kMinimumCompletionSize) +
                              " points");
    }
    const CompletionConfig cfg = resolve_config(cfg_in, average_nn_distance(file.cloud));
    const auto est = estimate_plane(file.cloud, cfg, !a.candidates_only);
    json candidates = json::array();
    for (const auto& c : est.detection.candidates) candidates.push_back(candidate_json(c));
    json doc = {{"version", kReportVersion},
                {"input", a.input},
                {"candidates", candidates},
                {"selected", candidate_json(est.detection.best)},
                {"plane", plane_json(est.plane)},
                {"refined", est.plane_refined},
                {"cube_side", cfg.balance.cube_side},
                {"notes", est.notes}};
    if (!a.candidates_only) {
        doc["registration"] = registration_json(est.registration);
        doc["global_registration"] = registration_json(est.global_registration);
    }
    const std::string text = doc.dump(2) + "\n";
    if (a.output.empty()) {
        out << text;
    } else {
        write_text(a.output, text);
    }
    return kExitOk;
}

// ------------------------------------------------------------------- augment

struct AugmentArgs {
    std::string dir_in, dir_out;
    std::vector<double> rates;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out, std::ostream& err) {
    for (double r : a.rates) {
        if (!(r > 0.0 && r < 1.0)) throw ConfigError({"--rates: every rate must lie in (0, 1)"});
    }
    if (!fs::is_directory(a.dir_in)) throw UsageError("not a directory: " + a.dir_in);
    const auto summary = damage_batch(a.dir_in, a.dir_out, a.rates, a.seed, a.jobs);
    out << "wrote " << summary.entries.size() - summary.failures << " damaged clouds, manifest "
        << summary.manifest.string() << "\n";
    if (summary.failures > 0) {
        err << summary.failures << " outputs failed; see manifest\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------- eval

struct Pair {
    std::string name;      // prediction file name
    fs::path pred, gt;
    double rate = -1.0;
};

struct Matching {
    std::vector<Pair> pairs;
    std::vector<std::string> unmatched;
};

Matching match_files(const std::vector<fs::path>& preds, const std::vector<fs::path>& gts,
                     std::string (*gt_key)(const fs::path&)) {
    std::map<std::string, fs::path> by_base;
    for (const auto& g : gts) by_base.emplace(gt_key(g), g);
    std::map<std::string, bool> used;
    Matching m;
    for (const auto& p : preds) {
        const std::string stem = p.stem().string();
        const auto it = by_base.find(base_stem(stem));
        if (it == by_base.end()) {
            m.unmatched.push_back("prediction without ground truth: " + p.filename().string());
            continue;
        }
        used[it->first] = true;
        m.pairs.push_back({p.filename().string(), p, it->second, rate_from_stem(stem)});
    }
    for (const auto& [base, path] : by_base) {
        if (!used.count(base)) m.unmatched.push_back("ground truth without prediction: " + path.filename().string());
    }
    return m;
}

std::string cloud_key(const fs::path& p) { return p.stem().string(); }

std::string planes_key(const fs::path& p) {
    const std::string name = p.filename().string();
    return name.substr(0, name.size() - std::string(".planes.json").size());
}

bool is_planes_file(const fs::path& p) {
    const std::string name = p.filename().string();
    const std::string suffix = ".planes.json";
    return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_plain_json(const fs::path& p) { return p.extension() == ".json" && !is_planes_file(p); }

struct EvalArgs {
    std::string pred_dir, gt_dir, out_prefix, label = "Ours";
    bool allow_partial = false, symmetry = false;
    double theta = kDefaultAngleThreshold;
    double tau_fraction = kDefaultCenterFraction;
    std::size_t jobs = 1;
};

struct EvalRow {
    std::string name;
    double rate = -1.0;
    double value = 0.0;  // CD, or 1/0 for symmetry correctness
    std::string error;
};

void print_table_row(std::ostream& out, const std::string& label, const std::map<double, std::pair<double, int>>& agg,
                     bool percent) {
    out << "| Method |";
    for (const auto& [rate, v] : agg) out << " " << rate_label(rate) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < agg.size(); ++i) out << "---|";
    out << "\n| " << label << " |";
    for (const auto& [rate, v] : agg) {
        out << " " << std::fixed << std::setprecision(2) << (percent ? 100.0 : kCdReportScale) * v.first / v.second
            << " |";
    }
    out << std::defaultfloat << "\n";
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    Matching m = a.symmetry ? match_files(list_files(a.pred_dir, is_plain_json), list_files(a.gt_dir, is_planes_file),
                                          planes_key)
                            : match_files(list_files(a.pred_dir, is_cloud_file), list_files(a.gt_dir, is_cloud_file),
                                          cloud_key);
    for (const auto& u : m.unmatched) err << "unmatched: " << u << "\n";
    if (!m.unmatched.empty() && !a.allow_partial) {
        err << m.unmatched.size() << " unmatched files (use --allow-partial to continue)\n";
        return kExitFailure;
    }
    if (m.pairs.empty()) {
        err << "no matched files\n";
        return kExitFailure;
    }

    std::vector<EvalRow> rows(m.pairs.size());
    parallel_for(m.pairs.size(), a.jobs, [&](std::size_t i) {
        const auto& p = m.pairs[i];
        rows[i] = {p.name, p.rate, 0.0, ""};
        try {
            if (a.symmetry) {
                const json pred = read_json(p.pred);
                const json gt = read_json(p.gt);
                const Plane predicted = plane_from_json(pred.at("plane"));
                BoundingBox box{vec_from_json(gt.at("bounds").at("min")), vec_from_json(gt.at("bounds").at("max"))};
                SymmetryEvalConfig cfg{a.theta, a.tau_fraction * box.diagonal()};
                bool hit = false;
                for (const auto& pj : gt.at("planes")) {
                    hit = hit || symmetry_correct(predicted, plane_from_json(pj), box, cfg);
                }
                rows[i].value = hit ? 1.0 : 0.0;
            } else {
                rows[i].value = chamfer_distance(io::load_cloud(p.pred).cloud, io::load_cloud(p.gt).cloud);
            }
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    });

    std::map<double, std::pair<double, int>> agg;
    json objects = json::array();
    std::ostringstream objects_csv;
    objects_csv << (a.symmetry ? "file,rate,correct\n" : "file,rate,cd,cd_x1e4\n");
    std::size_t failures = 0;
    for (const auto& r : rows) {
        json o = {{"file", r.name}, {"rate", r.rate < 0 ? json(nullptr) : json(r.rate)}};
        if (!r.error.empty()) {
            ++failures;
            err << "failed: " << r.name << ": " << r.error << "\n";
            o["error"] = r.error;
            objects.push_back(o);
            continue;
        }
        auto& slot = agg[r.rate];
        slot.first += r.value;
        slot.second += 1;
        if (a.symmetry) {
            o["correct"] = r.value > 0.5;
            objects_csv << r.name << "," << (r.rate < 0 ? "" : std::to_string(r.rate)) << ","
                        << (r.value > 0.5 ? 1 : 0) << "\n";
        } else {
            o["cd"] = r.value;
            o["cd_x1e4"] = r.value * kCdReportScale;
            std::ostringstream line;
            line << std::setprecision(17) << r.name << "," << (r.rate < 0 ? "" : std::to_string(r.rate)) << ","
                 << r.value << "," << r.value * kCdReportScale << "\n";
            objects_csv << line.str();
        }
        objects.push_back(o);
    }

    json rates = json::array();
    std::ostringstream rates_csv;
    rates_csv << (a.symmetry ? "rate,count,accuracy_percent\n" : "rate,count,mean_cd,mean_cd_x1e4\n");
    for (const auto& [rate, v] : agg) {
        const double mean = v.first / v.second;
        json rj = {{"rate", rate < 0 ? json(nullptr) : json(rate)}, {"count", v.second}};
        std::ostringstream line;
        line << std::setprecision(17) << (rate < 0 ? "" : std::to_string(rate)) << "," << v.second << ",";
        if (a.symmetry) {
            rj["accuracy_percent"] = 100.0 * mean;
            line << 100.0 * mean << "\n";
        } else {
            rj["mean_cd"] = mean;
            rj["mean_cd_x1e4"] = mean * kCdReportScale;
            line << mean << "," << mean * kCdReportScale << "\n";
        }
        rates_csv << line.str();
        rates.push_back(rj);
    }

    json report = {{"version", kReportVersion},
                   {"mode", a.symmetry ? "symmetry" : "chamfer"},
                   {"label", a.label},
                   {"objects", objects},
                   {"rates", rates},
                   {"unmatched", m.unmatched},
                   {"failures", failures}};
    if (a.symmetry) {
        report["theta"] = a.theta;
        report["tau_fraction"] = a.tau_fraction;
    }
    if (!a.out_prefix.empty()) {
        write_text(a.out_prefix + ".objects.csv", objects_csv.str());
        write_text(a.out_prefix + ".rates.csv", rates_csv.str());
        write_text(a.out_prefix + ".json", report.dump(2) + "\n");
    }
    print_table_row(out, a.label, agg, a.symmetry);
    return failures == 0 ? kExitOk : kExitFailure;
}

// ----------------------------------------------------------- sweep-threshold

struct SweepArgs {
    std::string input_dir, gt_dir, range, values, output;
    bool allow_partial = false;
    std::size_t jobs = 1;
    PipelineOptions pipeline;
};

std::vector<double> parse_thresholds(const std::string& range, const std::string& values) {
    std::vector<double> out;
    auto number = [](const std::string& t) {
        if (t == "inf") return std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    };
    try {
        if (!values.empty()) {
            std::stringstream ss(values);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(number(item));
        } else if (!range.empty()) {
            std::vector<double> parts;
            std::stringstream ss(range);
            std::string item;
            while (std::getline(ss, item, ':')) parts.push_back(number(item));
            if (parts.size() != 3 || !(parts[2] > 0.0) || !std::isfinite(parts[0]) || !std::isfinite(parts[1])) {
                throw ConfigError({"--range: expected start:stop:step with step > 0"});
            }
            const auto steps = static_cast<long long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
            for (long long k = 0; k <= steps; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError({"thresholds: could not parse '" + (values.empty() ? range : values) + "'"});
    }
    for (double v : out) {
        if (std::isnan(v) || v < 0.0) throw ConfigError({"thresholds: values must be >= 0"});
    }
    if (out.empty()) throw ConfigError({"thresholds: empty range"});
    return out;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const auto thresholds = parse_thresholds(a.range, a.values);
    CompletionConfig cfg = a.pipeline.resolve();
    cfg.skip_threshold = std::numeric_limits<double>::infinity();
    const Matching m =
        match_files(list_files(a.input_dir, is_cloud_file), list_files(a.gt_dir, is_cloud_file), cloud_key);
    for (const auto& u : m.unmatched) err << "unmatched: " << u << "\n";
    if (!m.unmatched.empty() && !a.allow_partial) return kExitFailure;
    if (m.pairs.empty()) {
        err << "no matched files\n";
        return kExitFailure;
    }

    struct Item {
        double scaled = 0.0, cd_input = 0.0, cd_completed = 0.0;
        std::string error;
    };
    std::vector<Item> items(m.pairs.size());
    parallel_for(m.pairs.size(), a.jobs, [&](std::size_t i) {
        try {
            const auto input = io::load_cloud(m.pairs[i].pred).cloud;
            const auto gt = io::load_cloud(m.pairs[i].gt).cloud;
            const auto r = complete(input, cfg);
            items[i].cd_input = chamfer_distance(input, gt);
            items[i].cd_completed = r.skipped ? items[i].cd_input : chamfer_distance(r.completed, gt);
            items[i].scaled = r.skipped ? std::numeric_limits<double>::infinity() : r.diagnostics.scaled_chamfer;
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    });
    std::size_t ok = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].error.empty()) {
            err << "failed: " << m.pairs[i].name << ": " << items[i].error << "\n";
        } else {
            ++ok;
        }
    }
    if (ok == 0) return kExitFailure;

    std::ostringstream csv;
    csv << "d_star,mean_cd,mean_cd_x1e4,kept,skipped\n" << std::setprecision(17);
    for (double t : thresholds) {
        double sum = 0.0;
        std::size_t kept = 0;
        for (const auto& it : items) {
            if (!it.error.empty()) continue;
            const bool keep = it.scaled <= t;
            kept += keep;
            sum += keep ? it.cd_completed : it.cd_input;
        }
        const double mean = sum / static_cast<double>(ok);
        csv << (std::isinf(t) ? std::string("inf") : [&] {
            std::ostringstream s;
            s << std::setprecision(17) << t;
            return s.str();
        }()) << "," << mean << "," << mean * kCdReportScale << "," << kept << "," << ok - kept << "\n";
    }
    if (a.output.empty()) {
        out << csv.str();
    } else {
        write_text(a.output, csv.str());
    }
    return ok == items.size() ? kExitOk : kExitFailure;
}

// ------------------------------------------------------------------ fixtures

struct FixturesArgs {
    std::string out_dir, kinds, pose = "canonical";
    std::size_t count = 4, points = 4096;
    std::uint64_t seed = 0;
    bool ascii = false;
    std::size_t jobs = 1;
};

int cmd_fixtures(const FixturesArgs& a, std::ostream& out) {
    std::vector<fixtures::ShapeKind> kinds;
    if (a.kinds.empty()) {
        kinds.assign(std::begin(fixtures::kSymmetricKinds), std::end(fixtures::kSymmetricKinds));
    } else {
        std::stringstream ss(a.kinds);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                kinds.push_back(fixtures::parse_kind(item));
            } catch (const InvalidArgument& e) {
                throw ConfigError({std::string("--kinds: ") + e.what()});
            }
        }
    }
    if (kinds.empty()) throw ConfigError({"--kinds: empty list"});
    if (a.points < 100) throw ConfigError({"--points: must be >= 100"});
    if (a.pose != "canonical" && a.pose != "random" && a.pose != "identity") {
        throw ConfigError({"--pose: expected canonical, random or identity"});
    }

    std::mt19937_64 rng(a.seed);
    std::vector<fixtures::ShapeSpec> specs;
    for (std::size_t i = 0; i < a.count; ++i) {
        fixtures::ShapeSpec s;
        s.kind = kinds[i % kinds.size()];
        s.point_count = a.points;
        s.seed = rng();
        const std::uint64_t pose_seed = rng();
        if (a.pose == "canonical") s.pose = fixtures::canonical_pose(pose_seed);
        if (a.pose == "random") s.pose = fixtures::random_pose(pose_seed);
        specs.push_back(s);
    }
    fs::create_directories(a.out_dir);
    const auto format = a.ascii ? io::Format::PlyAscii : io::Format::PlyBinaryLE;
    std::vector<json> entries(specs.size());
    parallel_for(specs.size(), a.jobs, [&](std::size_t i) {
        const auto& s = specs[i];
        std::ostringstream name;
        name << fixtures::to_string(s.kind) << "_" << std::setw(3) << std::setfill('0') << i;
        const auto fx = fixtures::generate(s);
        io::save_cloud(fx.cloud, fs::path(a.out_dir) / (name.str() + ".ply"), format);
        json planes = json::array();
        for (const auto& p : fx.symmetry_planes) planes.push_back(plane_json(p));
        write_text(fs::path(a.out_dir) / (name.str() + ".planes.json"),
                   json{{"planes", planes},
                        {"bounds", {{"min", vec_json(fx.bounds.min_corner)}, {"max", vec_json(fx.bounds.max_corner)}}}}
                           .dump(2) +
                       "\n");
        json rotation = json::array();
        for (int r = 0; r < 3; ++r) rotation.push_back(vec_json(s.pose.rotation.row(r).transpose()));
        entries[i] = {{"name", name.str()},
                      {"file", name.str() + ".ply"},
                      {"planes_file", name.str() + ".planes.json"},
                      {"kind", std::string(fixtures::to_string(s.kind))},
                      {"point_count", s.point_count},
                      {"seed", s.seed},
                      {"pose", {{"rotation", rotation}, {"translation", vec_json(s.pose.translation)}}}};
    });
    const json manifest = {{"version", kReportVersion}, {"seed", a.seed}, {"fixtures", entries}};
    write_text(fs::path(a.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << specs.size() << " fixtures to " << a.out_dir << "\n";
    return kExitOk;
}

}  // namespace

std::size_t default_jobs() {
    if (const char* env = std::getenv("SYMCOMPLETE_JOBS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return 1;
}

double rate_from_stem(const std::string& stem) {
    const auto pos = stem.rfind("__dr");
    if (pos == std::string::npos) return -1.0;
    std::string digits = stem.substr(pos + 4);
    std::replace(digits.begin(), digits.end(), 'p', '.');
    try {
        std::size_t used = 0;
        const double pct = std::stod(digits, &used);
        if (used != digits.size()) return -1.0;
        return pct / 100.0;
    } catch (const std::exception&) {
        return -1.0;
    }
}

std::string base_stem(const std::string& stem) {
    const auto pos = stem.rfind("__dr");
    if (pos == std::string::npos || rate_from_stem(stem) < 0.0) return stem;
    return stem.substr(0, pos);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Symmetry-based point cloud completion"};
    app.require_subcommand(1);
    const std::size_t env_jobs = default_jobs();

    CompleteArgs complete_args;
    auto* c = app.add_subcommand("complete", "complete a damaged cloud");
    c->add_option("input", complete_args.input, "input cloud (.ply/.xyz)")->required();
    c->add_option("output", complete_args.output, "output cloud")->required();
    c->add_option("--diagnostics", complete_args.diagnostics, "write diagnostics JSON here");
    c->add_flag("--ascii", complete_args.ascii, "write ASCII PLY");
    complete_args.pipeline.add_to(*c);
    complete_args.pipeline.add_completion_to(*c);

    DetectArgs detect_args;
    auto* d = app.add_subcommand("detect-plane", "print symmetry candidates and the selected plane as JSON");
    d->add_option("input", detect_args.input, "input cloud")->required();
    d->add_option("-o,--output", detect_args.output, "write JSON here instead of stdout");
    d->add_flag("--candidates-only", detect_args.candidates_only, "skip registration refinement");
    detect_args.pipeline.add_to(*d);

    AugmentArgs augment_args;
    augment_args.jobs = env_jobs;
    auto* g = app.add_subcommand("augment", "damage every cloud in a directory");
    g->add_option("input_dir", augment_args.dir_in)->required();
    g->add_option("output_dir", augment_args.dir_out)->required();
    g->add_option("--rates", augment_args.rates, "damage rates in (0, 1)")->delimiter(',')->required();
    g->add_option("--seed", augment_args.seed, "master seed");
    g->add_option("--jobs", augment_args.jobs, "worker threads")->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    eval_args.jobs = env_jobs;
    auto* e = app.add_subcommand("eval", "Chamfer or symmetry-accuracy report against ground truth");
    e->add_option("pred_dir", eval_args.pred_dir)->required();
    e->add_option("gt_dir", eval_args.gt_dir)->required();
    e->add_option("--out", eval_args.out_prefix, "report prefix (.objects.csv, .rates.csv, .json)");
    e->add_option("--label", eval_args.label, "method label in the table row");
    e->add_flag("--allow-partial", eval_args.allow_partial, "continue past unmatched files");
    e->add_flag("--symmetry", eval_args.symmetry, "plane accuracy mode");
    e->add_option("--theta", eval_args.theta, "angle threshold (rad)")->check(CLI::PositiveNumber);
    e->add_option("--tau-fraction", eval_args.tau_fraction, "center threshold as a fraction of the GT diagonal")
        ->check(CLI::PositiveNumber);
    e->add_option("--seed", [](const CLI::results_t&) { return true; }, "accepted for uniformity; unused");
    e->add_option("--jobs", eval_args.jobs, "worker threads")->check(CLI::PositiveNumber);

    SweepArgs sweep_args;
    sweep_args.jobs = env_jobs;
    auto* s = app.add_subcommand("sweep-threshold", "mean CD against ground truth for a range of skip thresholds");
    s->add_option("input_dir", sweep_args.input_dir)->required();
    s->add_option("gt_dir", sweep_args.gt_dir)->required();
    auto* range = s->add_option("--range", sweep_args.range, "start:stop:step");
    s->add_option("--values", sweep_args.values, "comma-separated thresholds (inf allowed)")->excludes(range);
    s->add_option("-o,--output", sweep_args.output, "write CSV here instead of stdout");
    s->add_flag("--allow-partial", sweep_args.allow_partial);
    s->add_option("--jobs", sweep_args.jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep_args.pipeline.add_to(*s);

    FixturesArgs fixtures_args;
    fixtures_args.jobs = env_jobs;
    auto* f = app.add_subcommand("fixtures", "write synthetic fixtures with ground-truth planes");
    f->add_option("output_dir", fixtures_args.out_dir)->required();
    f->add_option("--count", fixtures_args.count);
    f->add_option("--points", fixtures_args.points);
    f->add_option("--seed", fixtures_args.seed);
    f->add_option("--kinds", fixtures_args.kinds, "comma-separated: box,wedge,ellipsoid,composite,blob");
    f->add_option("--pose", fixtures_args.pose, "canonical | random | identity");
    f->add_flag("--ascii", fixtures_args.ascii);
    f->add_option("--jobs", fixtures_args.jobs, "worker threads")->check(CLI::PositiveNumber);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (c->parsed()) return cmd_complete(complete_args, out);
        if (d->parsed()) return cmd_detect_plane(detect_args, out);
        if (g->parsed()) return cmd_augment(augment_args, out, err);
        if (e->parsed()) return cmd_eval(eval_args, out, err);
        if (s->parsed()) {
            if (sweep_args.range.empty() && sweep_args.values.empty()) {
                throw ConfigError({"sweep-threshold: give --range or --values"});
            }
            return cmd_sweep(sweep_args, out, err);
        }
        if (f->parsed()) return cmd_fixtures(fixtures_args, out);
    } catch (const ConfigError& ce) {
        for (const auto& p : ce.problems()) err << "config error: " << p << "\n";
        return kExitConfig;
    } catch (const UsageError& ue) {
        err << "error: " << ue.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitFailure;
    }
    return kExitConfig;
}

}  // namespace symcomplete::cli
