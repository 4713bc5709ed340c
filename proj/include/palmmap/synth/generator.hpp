#pragma once

#include <map>
#include <string>
#include <vector>

#include "palmmap/raster/manifest.hpp"
#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Forward model for synthetic scenes with exact ground truth. Class
// signatures live in one block so tests can tighten or loosen class
// separability deliberately.

enum class SynthClass { PALM, FOREST, SETTLEMENT, MANGROVE, WATER };

SynthClass synth_class_from_name(const std::string& s);
std::string synth_class_name(SynthClass c);

struct ClassSignature {
    double vv_db = -7.0;
    double vh_db = -12.0;
    double roughness_db = 0.5;  // sd of the static per-pixel texture field
    double ndvi = 0.85;
    double bsi = 0.0;
};

struct ParcelSpec {
    int x0 = 0, y0 = 0, w = 0, h = 0;  // pixel rect
    SynthClass cls = SynthClass::PALM;
    int establishment_year = 2000;  // palm only
};

struct NoiseSpec {
    double radar_sd_db = 1.5;
    double optical_sd = 0.02;
    double cloud_rate = 0.3;
};

struct SceneSpec {
    GridGeometry grid;
    int ref_year = 2017;
    std::vector<int> radar_years;
    int scenes_per_year = 12;
    int optical_start_year = 0;  // 0 = no optical archive
    int optical_end_year = 0;
    std::vector<std::string> optical_bands{"blue", "red", "nir", "swir1"};
    bool emit_incidence = true;
    double incidence_slope_db_per_deg = -0.1;
    SynthClass background = SynthClass::FOREST;
    std::vector<ParcelSpec> parcels;
    NoiseSpec noise;
    int closure_lag = 2;       // years from establishment to canopy closure
    int loss_lead_years = 5;   // forest loss precedes establishment by this much
    double dem_base_m = 100.0;
    double dem_ramp_per_px = 0.0;  // adds x * ramp to the DEM
    ClassSignature palm_young;     // open-canopy palm appearance
    std::map<SynthClass, ClassSignature> classes;
    uint64_t seed = 1;

    void check() const;
};

SceneSpec default_scene_spec();
SceneSpec load_scene_spec(const std::string& path);
void save_scene_spec(const std::string& path, const SceneSpec& spec);

// Class emitting at a pixel in a given year (palm parcels pass through
// forest -> young palm -> closed palm as the year advances).
enum class SurfaceState { BACKGROUND_CLASS, PALM_YOUNG, PALM_CLOSED };

struct RadarYear {
    std::vector<Raster> scenes;   // bands: vv, vh [, incidence]
    RasterBand truth_closed_palm; // palm with closed canopy in that year
};

// Deterministic per (spec.seed, year, scene index); class-conditional means
// plus a static roughness field plus white Gaussian noise, clamped to the
// dB domain.
RadarYear generate_radar_year(const SceneSpec& spec, int year);

// One monthly optical scene: reflectance bands solved from per-class
// (ndvi, bsi) targets, truncated-Gaussian band noise, per-pixel clouds
// flagged in the QA band.
Raster generate_optical_month(const SceneSpec& spec, int year, int month);

// Truth rasters derived from the spec alone.
RasterBand truth_palm_mask(const SceneSpec& spec);                 // all palm parcels
RasterBand truth_extent(const SceneSpec& spec, int year);          // closed-canopy palm
RasterBand truth_closure_years(const SceneSpec& spec);             // sentinel-encoded
RasterBand truth_class_map(const SceneSpec& spec);
RasterBand mangrove_mask(const SceneSpec& spec);
RasterBand loss_year_map(const SceneSpec& spec);
RasterBand dem_map(const SceneSpec& spec);

// Writes every scene, truth raster and a manifest into out_dir; returns the
// manifest path.
std::string generate_scene_set(const SceneSpec& spec, const std::string& out_dir, int workers = 1);

}  // namespace palmmap
