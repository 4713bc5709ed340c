#include "palmmap/pipeline/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "palmmap/classify/stratify.hpp"
#include "palmmap/util/parallel.hpp"

namespace palmmap {

namespace fs = std::filesystem;
using nlohmann::json;

int default_workers() {
    if (const char* env = std::getenv("PALMMAP_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
    const fs::path base = fs::absolute(path).parent_path();

    RunConfig c;
    c.workers = j.value("workers", 0);
    c.seed = j.value("seed", 42ull);
    c.out_dir = resolve(base, j.value("out_dir", std::string("out")));
    c.manifest = resolve(base, j.value("manifest", std::string()));
    if (j.contains("synth")) c.synth_spec = resolve(base, j["synth"].value("spec", std::string()));

    if (j.contains("composite")) {
        const auto& cj = j["composite"];
        c.composite_year = cj.value("year", c.composite_year);
        c.composite.trim_fraction = cj.value("trim_fraction", c.composite.trim_fraction);
        c.composite.theta_ref = cj.value("theta_ref", c.composite.theta_ref);
        c.composite.fit_slope = cj.value("fit_slope", c.composite.fit_slope);
        c.composite.default_slope = cj.value("default_slope", c.composite.default_slope);
        if (cj.contains("byte_ranges")) {
            const auto& br = cj["byte_ranges"];
            auto get = [&](const char* name, ByteRange& r) {
                if (br.contains(name)) {
                    r.lo = br[name][0];
                    r.hi = br[name][1];
                }
            };
            get("vv", c.composite.vv_range);
            get("vh", c.composite.vh_range);
            get("diff", c.composite.diff_range);
        }
    }

    if (j.contains("texture")) {
        const auto& tj = j["texture"];
        c.texture.levels = tj.value("levels", c.texture.levels);
        c.texture.radius = tj.value("radius", c.texture.radius);
        c.texture.symmetric = tj.value("symmetric", c.texture.symmetric);
        if (tj.contains("offsets")) {
            c.texture.offsets.clear();
            for (const auto& o : tj["offsets"])
                c.texture.offsets.emplace_back(o[0].get<int>(), o[1].get<int>());
        }
    }

    if (j.contains("classify")) {
        const auto& kj = j["classify"];
        c.classify.cell_side = kj.value("cell_side", c.classify.cell_side);
        c.classify.n_samples = kj.value("n_samples", c.classify.n_samples);
        c.classify.kmeans.k_min = kj.value("k_min", c.classify.kmeans.k_min);
        c.classify.kmeans.k_max = kj.value("k_max", c.classify.kmeans.k_max);
        c.classify.vote_threshold = kj.value("vote_threshold", c.classify.vote_threshold);
        if (kj.contains("labels")) {
            const auto& lj = kj["labels"];
            c.classify.labels_mode = lj.value("mode", std::string("file"));
            c.classify.labels_path = resolve(base, lj.value("path", std::string()));
            c.classify.truth_path = resolve(base, lj.value("truth", std::string()));
            c.classify.truth_min_fraction = lj.value("min_fraction", 0.5);
        }
        if (kj.contains("aoi_bbox")) {
            std::array<double, 4> bb{};
            for (int i = 0; i < 4; ++i) bb[i] = kj["aoi_bbox"][i];
            c.classify.aoi_bbox = bb;
        }
    }

    if (j.contains("indices")) {
        const auto& ij = j["indices"];
        if (ij.contains("qa")) {
            const auto& qj = ij["qa"];
            if (qj.contains("cloud_bits")) c.indices.qa.cloud_bits = qj["cloud_bits"].get<std::vector<int>>();
            if (qj.contains("shadow_bits")) c.indices.qa.shadow_bits = qj["shadow_bits"].get<std::vector<int>>();
            if (qj.contains("fill_bits")) c.indices.qa.fill_bits = qj["fill_bits"].get<std::vector<int>>();
        }
        c.indices.window_days = ij.value("window_days", c.indices.window_days);
        c.indices.min_obs = ij.value("min_obs", c.indices.min_obs);
        c.indices.ndvi_year = ij.value("ndvi_year", c.indices.ndvi_year);
    }

    if (j.contains("postproc")) {
        const auto& pj = j["postproc"];
        c.postproc.ndvi_floor = pj.value("ndvi_floor", c.postproc.ndvi_floor);
        c.postproc.mmu_m2 = pj.value("mmu_m2", c.postproc.mmu_m2);
        c.postproc.slope_fill_threshold_deg =
            pj.value("slope_fill_threshold_deg", c.postproc.slope_fill_threshold_deg);
        c.postproc.meters_per_unit = pj.value("meters_per_unit", c.postproc.meters_per_unit);
        if (pj.contains("excludes"))
            for (const auto& e : pj["excludes"]) c.postproc.excludes.push_back(resolve(base, e));
        c.postproc.dem = resolve(base, pj.value("dem", std::string()));
    }

    if (j.contains("age")) {
        const auto& aj = j["age"];
        c.age.ref_year = aj.value("ref_year", c.age.ref_year);
        if (aj.contains("threshold")) {
            if (aj["threshold"].is_string()) {
                c.age.auto_threshold = true;  // "auto"
            } else {
                c.age.auto_threshold = false;
                c.age.threshold = aj["threshold"];
            }
        }
        c.age.percentile = aj.value("percentile", c.age.percentile);
        c.age.closure_age_offset = aj.value("closure_age_offset", c.age.closure_age_offset);
        c.age.min_months = aj.value("min_months", c.age.min_months);
        c.age.archive_start_year = aj.value("archive_start_year", c.age.archive_start_year);
    }

    if (j.contains("validate")) {
        const auto& vj = j["validate"];
        c.validate.n_total = vj.value("n_total", c.validate.n_total);
        std::string alloc = vj.value("allocation", std::string("equal"));
        c.validate.allocation = alloc == "proportional" ? Allocation::PROPORTIONAL : Allocation::EQUAL;
        c.validate.interpretations = resolve(base, vj.value("interpretations", std::string()));
    }

    if (j.contains("report")) {
        const auto& rj = j["report"];
        for (const auto& reg : rj.value("regions", json::array())) {
            RegionConfig rc;
            rc.name = reg.at("name");
            rc.mask_path = resolve(base, reg.value("mask", std::string()));
            c.report.regions.push_back(rc);
        }
        c.report.compare = resolve(base, rj.value("compare", std::string()));
    }
    return c;
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> diags;
    auto bad = [&diags](const std::string& msg) { diags.push_back(msg); };

    if (c.workers < 0) bad("workers must be >= 1 (or 0 for the default)");
    if (c.composite.trim_fraction < 0.0 || c.composite.trim_fraction >= 1.0)
        bad("composite.trim_fraction must be in [0,1)");
    if (c.composite.vv_range.lo >= c.composite.vv_range.hi) bad("composite.byte_ranges.vv: lo must be < hi");
    if (c.composite.vh_range.lo >= c.composite.vh_range.hi) bad("composite.byte_ranges.vh: lo must be < hi");
    if (c.composite.diff_range.lo >= c.composite.diff_range.hi) bad("composite.byte_ranges.diff: lo must be < hi");

    if (c.texture.levels < 2 || c.texture.levels > 256) bad("texture.levels must be in [2,256]");
    if (c.texture.radius < 1) bad("texture.radius must be >= 1");
    if (c.texture.offsets.empty()) bad("texture.offsets must be non-empty");
    for (auto [dy, dx] : c.texture.offsets)
        if (dy == 0 && dx == 0) bad("texture.offsets must not contain (0,0)");

    if (c.classify.cell_side <= 0.0) bad("classify.cell_side must be positive");
    if (c.classify.n_samples < 1) bad("classify.n_samples must be >= 1");
    if (c.classify.kmeans.k_min < 2) bad("classify.k_min must be >= 2");
    if (c.classify.kmeans.k_max < c.classify.kmeans.k_min) bad("classify.k_max must be >= k_min");
    if (c.classify.vote_threshold < 1) bad("classify.vote_threshold must be >= 1");
    if (c.classify.labels_mode != "file" && c.classify.labels_mode != "truth")
        bad("classify.labels.mode must be 'file' or 'truth'");
    if (c.classify.labels_mode == "truth" && c.classify.truth_path.empty())
        bad("classify.labels.truth path required in truth mode");
    if (c.classify.aoi_bbox) {
        const auto& bb = *c.classify.aoi_bbox;
        if (bb[2] <= bb[0] || bb[3] <= bb[1]) {
            bad("classify.aoi_bbox is empty");
        } else {
            auto cells = partition_grids(Bbox{bb[0], bb[1], bb[2], bb[3]}, c.classify.cell_side);
            if (c.classify.vote_threshold > static_cast<int>(cells.size()))
                bad("classify.vote_threshold (" + std::to_string(c.classify.vote_threshold) +
                    ") exceeds the grid-cell count (" + std::to_string(cells.size()) + ")");
        }
    }

    try {
        c.indices.qa.check();
    } catch (const std::exception& e) {
        bad(std::string("indices.qa: ") + e.what());
    }
    if (c.indices.window_days < 1) bad("indices.window_days must be >= 1");
    if (c.indices.min_obs < 1) bad("indices.min_obs must be >= 1");

    if (c.postproc.ndvi_floor < -1.0 || c.postproc.ndvi_floor > 1.0)
        bad("postproc.ndvi_floor must be in [-1,1]");
    if (c.postproc.mmu_m2 < 0.0) bad("postproc.mmu_m2 must be >= 0");
    if (c.postproc.meters_per_unit <= 0.0) bad("postproc.meters_per_unit must be positive");

    if (c.age.percentile <= 0.0 || c.age.percentile > 100.0)
        bad("age.percentile must be in (0,100]");
    if (!c.age.auto_threshold && (c.age.threshold < -1.0 || c.age.threshold > 1.0))
        bad("age.threshold must be a BSI value in [-1,1]");
    if (c.age.min_months < 1) bad("age.min_months must be >= 1");
    if (c.age.ref_year < c.age.archive_start_year) bad("age.ref_year precedes the archive start");

    if (c.validate.n_total < 2) bad("validate.n_total must be >= 2");
    return diags;
}

std::vector<std::string> validate_config_file(const std::string& path) {
    if (!fs::exists(path)) throw std::runtime_error("config file '" + path + "' does not exist");
    RunConfig c = load_run_config(path);
    return validate_config(c);
}

}  // namespace palmmap
