#pragma once

#include <optional>
#include <string>
#include <vector>

#include "palmmap/classify/kmeans.hpp"
#include "palmmap/composite/composite.hpp"
#include "palmmap/optical/indices.hpp"
#include "palmmap/texture/glcm.hpp"
#include "palmmap/validate/sampling.hpp"

namespace palmmap {

struct ClassifyConfig {
    double cell_side = 5.0;
    size_t n_samples = 50000;
    KmeansOptions kmeans;
    int vote_threshold = 7;
    // Labels come from a human-filled CSV, or are bootstrapped from a truth
    // raster (synthetic runs): a cluster is oilpalm when at least
    // truth_min_fraction of its sample points fall on truth palm.
    std::string labels_mode = "file";  // "file" | "truth"
    std::string labels_path;
    std::string truth_path;
    double truth_min_fraction = 0.5;
    std::optional<std::array<double, 4>> aoi_bbox;  // minx,miny,maxx,maxy (planning check)
};

struct IndicesConfig {
    QaSpec qa;
    int window_days = 365;
    int min_obs = 3;
    int ndvi_year = 0;  // 0 = composite year
};

struct PostprocConfig {
    double ndvi_floor = 0.5;
    double mmu_m2 = 900.0;
    double slope_fill_threshold_deg = 25.0;
    std::vector<std::string> excludes;
    std::string dem;              // optional DEM path
    double meters_per_unit = 1.0;  // pixel-size scale for slope on geographic grids
};

struct AgeConfig {
    int ref_year = 2017;
    bool auto_threshold = true;
    double threshold = 0.2;  // used when auto_threshold is false
    double percentile = 95.0;
    int closure_age_offset = 2;
    int min_months = 6;
    int archive_start_year = 1984;
};

struct ValidateConfig {
    size_t n_total = 1000;
    Allocation allocation = Allocation::EQUAL;
    std::string interpretations;  // CSV path; empty = only draw the sample
};

struct RegionConfig {
    std::string name;
    std::string mask_path;  // empty = whole grid
};

struct ReportConfig {
    std::vector<RegionConfig> regions;
    std::string compare;  // other product raster path, optional
};

struct RunConfig {
    int workers = 0;  // 0 = default_workers()
    uint64_t seed = 42;
    std::string out_dir = "out";
    std::string manifest;
    std::string synth_spec;  // optional synth stage input
    int composite_year = 2017;
    CompositeParams composite;
    GlcmParams texture;
    ClassifyConfig classify;
    IndicesConfig indices;
    PostprocConfig postproc;
    AgeConfig age;
    ValidateConfig validate;
    ReportConfig report;
};

RunConfig load_run_config(const std::string& path);

// Schema and cross-field checks; an empty list means the config is valid.
std::vector<std::string> validate_config(const RunConfig& config);
std::vector<std::string> validate_config_file(const std::string& path);

}  // namespace palmmap
