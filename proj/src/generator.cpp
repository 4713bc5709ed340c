#include "palmmap/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "palmmap/age/closure.hpp"
#include "palmmap/raster/geotiff.hpp"
#include "palmmap/util/parallel.hpp"
#include "palmmap/util/rng.hpp"

namespace palmmap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Hash stream tags; every random draw is keyed by (seed, tag, ...).
constexpr uint64_t kStreamRough = 0x01;
constexpr uint64_t kStreamRadar = 0x02;
constexpr uint64_t kStreamOptical = 0x03;
constexpr uint64_t kStreamCloud = 0x04;

}  // namespace

SynthClass synth_class_from_name(const std::string& s) {
    if (s == "palm") return SynthClass::PALM;
    if (s == "forest") return SynthClass::FOREST;
    if (s == "settlement") return SynthClass::SETTLEMENT;
    if (s == "mangrove") return SynthClass::MANGROVE;
    if (s == "water") return SynthClass::WATER;
    throw std::invalid_argument("unknown class '" + s + "'");
}

std::string synth_class_name(SynthClass c) {
    switch (c) {
        case SynthClass::PALM: return "palm";
        case SynthClass::FOREST: return "forest";
        case SynthClass::SETTLEMENT: return "settlement";
        case SynthClass::MANGROVE: return "mangrove";
        case SynthClass::WATER: return "water";
    }
    throw std::logic_error("unhandled class");
}

SceneSpec default_scene_spec() {
    SceneSpec s;
    s.classes[SynthClass::PALM] = {-8.0, -14.0, 0.3, 0.80, 0.05};
    s.classes[SynthClass::FOREST] = {-7.0, -12.0, 0.6, 0.85, 0.00};
    s.classes[SynthClass::SETTLEMENT] = {-5.0, -11.0, 1.2, 0.20, 0.30};
    s.classes[SynthClass::MANGROVE] = {-8.3, -14.4, 0.35, 0.80, 0.02};
    s.classes[SynthClass::WATER] = {-18.0, -24.0, 0.1, 0.05, -0.10};
    s.palm_young = {-10.0, -17.0, 0.5, 0.35, 0.35};
    return s;
}

void SceneSpec::check() const {
    grid.check();
    if (noise.cloud_rate < 0.0 || noise.cloud_rate > 1.0)
        throw std::invalid_argument("cloud_rate must be in [0,1]");
    if (closure_lag < 0) throw std::invalid_argument("closure_lag must be >= 0");
    for (const auto& p : parcels) {
        if (p.x0 < 0 || p.y0 < 0 || p.x0 + p.w > grid.width || p.y0 + p.h > grid.height)
            throw std::invalid_argument("parcel outside grid");
        if (p.cls == SynthClass::PALM &&
            (p.establishment_year < 1980 || p.establishment_year > ref_year + 10))
            throw std::invalid_argument("palm establishment_year out of range");
    }
}

namespace {

struct PixelState {
    SynthClass cls;
    int establishment_year;  // palm only, else 0
};

// Last parcel wins where rects overlap.
std::vector<PixelState> rasterize(const SceneSpec& spec) {
    std::vector<PixelState> st(spec.grid.size(), {spec.background, 0});
    for (const auto& p : spec.parcels) {
        for (int r = p.y0; r < p.y0 + p.h; ++r)
            for (int c = p.x0; c < p.x0 + p.w; ++c)
                st[static_cast<size_t>(r) * spec.grid.width + c] = {p.cls, p.establishment_year};
    }
    return st;
}

SurfaceState surface_state(const PixelState& px, const SceneSpec& spec, int year) {
    if (px.cls != SynthClass::PALM) return SurfaceState::BACKGROUND_CLASS;
    if (year < px.establishment_year) return SurfaceState::BACKGROUND_CLASS;  // still forest
    if (year < px.establishment_year + spec.closure_lag) return SurfaceState::PALM_YOUNG;
    return SurfaceState::PALM_CLOSED;
}

const ClassSignature& signature_for(const PixelState& px, const SceneSpec& spec, int year) {
    switch (surface_state(px, spec, year)) {
        case SurfaceState::PALM_YOUNG: return spec.palm_young;
        case SurfaceState::PALM_CLOSED: return spec.classes.at(SynthClass::PALM);
        case SurfaceState::BACKGROUND_CLASS:
            return spec.classes.at(px.cls == SynthClass::PALM ? SynthClass::FOREST : px.cls);
    }
    throw std::logic_error("unhandled state");
}

double incidence_at(const SceneSpec& spec, int col) {
    // Across-track gradient over the IW incidence span.
    if (spec.grid.width <= 1) return 37.5;
    return 32.0 + 10.0 * static_cast<double>(col) / (spec.grid.width - 1);
}

// Truncated gaussian: clipped at 4 sd to keep reflectances physical.
double clipped_normal(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    double z = hash_normal(a, b, c, d);
    return std::clamp(z, -4.0, 4.0);
}

// Solves (blue, red, nir, swir1) from (ndvi, bsi) targets with
// nir + red = 0.5 and blue = 0.05.
void solve_bands(double ndvi_t, double bsi_t, double& blue, double& red, double& nir,
                 double& swir1) {
    nir = 0.25 * (1.0 + ndvi_t);
    red = 0.25 * (1.0 - ndvi_t);
    blue = 0.05;
    swir1 = (bsi_t * (red + nir + blue) + nir + blue - red) / (1.0 - bsi_t);
    swir1 = std::clamp(swir1, 0.0, 1.0);
}

}  // namespace

RadarYear generate_radar_year(const SceneSpec& spec, int year) {
    spec.check();
    const size_t n = spec.grid.size();
    const auto state = rasterize(spec);

    RadarYear out;
    out.truth_closed_palm = truth_extent(spec, year);

    for (int s = 0; s < spec.scenes_per_year; ++s) {
        Raster scene;
        scene.grid = spec.grid;
        scene.bands.push_back(make_band("vv", Unit::Db, n, 0.0f));
        scene.bands.push_back(make_band("vh", Unit::Db, n, 0.0f));
        if (spec.emit_incidence)
            scene.bands.push_back(make_band("incidence", Unit::Degrees, n, 0.0f));
        RasterBand& vv = scene.bands[0];
        RasterBand& vh = scene.bands[1];

        const uint64_t scene_uid = static_cast<uint64_t>(year) * 64 + s;
        for (size_t i = 0; i < n; ++i) {
            const ClassSignature& sig = signature_for(state[i], spec, year);
            const int col = static_cast<int>(i % spec.grid.width);
            const double theta = incidence_at(spec, col);
            const double angle_term =
                spec.emit_incidence ? spec.incidence_slope_db_per_deg * (theta - 37.5) : 0.0;
            const double rough = hash_normal(spec.seed, kStreamRough, i) * sig.roughness_db;
            const double nv = hash_normal(spec.seed, kStreamRadar, scene_uid, i * 2) *
                              spec.noise.radar_sd_db;
            const double nh = hash_normal(spec.seed, kStreamRadar, scene_uid, i * 2 + 1) *
                              spec.noise.radar_sd_db;
            vv.values[i] = static_cast<float>(std::clamp(sig.vv_db + rough + angle_term + nv, -60.0, 20.0));
            vh.values[i] = static_cast<float>(std::clamp(sig.vh_db + rough + angle_term + nh, -60.0, 20.0));
            if (spec.emit_incidence) scene.bands[2].values[i] = static_cast<float>(theta);
        }
        out.scenes.push_back(std::move(scene));
    }
    return out;
}

Raster generate_optical_month(const SceneSpec& spec, int year, int month) {
    const size_t n = spec.grid.size();
    const auto state = rasterize(spec);
    const uint64_t scene_uid = static_cast<uint64_t>(month_index(year, month));

    Raster scene;
    scene.grid = spec.grid;
    for (const auto& name : spec.optical_bands)
        scene.bands.push_back(make_band(name, Unit::Reflectance, n, 0.0f));
    scene.bands.push_back(make_band("qa", Unit::Flag, n, 0.0f));
    RasterBand& qa = scene.bands.back();

    for (size_t i = 0; i < n; ++i) {
        const ClassSignature& sig = signature_for(state[i], spec, year);
        double blue, red, nir, swir1;
        solve_bands(sig.ndvi, sig.bsi, blue, red, nir, swir1);
        double vals[4] = {blue, red, nir, swir1};
        static const char* names[4] = {"blue", "red", "nir", "swir1"};
        int b = 0;
        for (auto& band : scene.bands) {
            if (&band == &qa) continue;
            for (int k = 0; k < 4; ++k) {
                if (band.name == names[k]) {
                    double noise = clipped_normal(spec.seed, kStreamOptical,
                                                  scene_uid * 8 + k, i) *
                                   spec.noise.optical_sd;
                    band.values[i] = static_cast<float>(std::clamp(vals[k] + noise, 0.0, 1.0));
                    break;
                }
            }
            ++b;
        }
        if (hash_uniform(spec.seed, kStreamCloud, scene_uid, i) < spec.noise.cloud_rate)
            qa.values[i] = 1.0f;  // rewritten below as a QA bitmask value
    }
    // QA uses CFMASK-style bit 3 for cloud.
    qa.name = "qa";
    qa.unit = Unit::ClassId;
    for (size_t i = 0; i < n; ++i) qa.values[i] = qa.values[i] == 1.0f ? 8.0f : 0.0f;
    return scene;
}

RasterBand truth_palm_mask(const SceneSpec& spec) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("truth_palm", Unit::Flag, spec.grid.size(), 0.0f);
    for (size_t i = 0; i < state.size(); ++i)
        if (state[i].cls == SynthClass::PALM) b.values[i] = 1.0f;
    return b;
}

RasterBand truth_extent(const SceneSpec& spec, int year) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("truth_extent", Unit::Flag, spec.grid.size(), 0.0f);
    for (size_t i = 0; i < state.size(); ++i)
        if (state[i].cls == SynthClass::PALM &&
            state[i].establishment_year + spec.closure_lag <= year)
            b.values[i] = 1.0f;
    return b;
}

RasterBand truth_closure_years(const SceneSpec& spec) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("truth_closure", Unit::Year, spec.grid.size(), kClosureNodata,
                             kClosureNodata);
    const int archive_start = spec.optical_start_year > 0 ? spec.optical_start_year : 1984;
    for (size_t i = 0; i < state.size(); ++i) {
        if (state[i].cls != SynthClass::PALM) continue;
        int closure = state[i].establishment_year + spec.closure_lag;
        if (closure <= archive_start) b.values[i] = kClosurePreArchive;
        else if (closure > spec.ref_year) b.values[i] = kClosureOpenCanopy;
        else b.values[i] = static_cast<float>(closure);
    }
    return b;
}

RasterBand truth_class_map(const SceneSpec& spec) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("truth_class", Unit::ClassId, spec.grid.size(), 0.0f);
    for (size_t i = 0; i < state.size(); ++i)
        b.values[i] = static_cast<float>(static_cast<int>(state[i].cls) + 1);
    return b;
}

RasterBand mangrove_mask(const SceneSpec& spec) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("mangrove", Unit::Flag, spec.grid.size(), 0.0f);
    for (size_t i = 0; i < state.size(); ++i)
        if (state[i].cls == SynthClass::MANGROVE) b.values[i] = 1.0f;
    return b;
}

RasterBand loss_year_map(const SceneSpec& spec) {
    const auto state = rasterize(spec);
    RasterBand b = make_band("lossyear", Unit::Year, spec.grid.size(), 0.0f, 0.0f);
    for (size_t i = 0; i < state.size(); ++i) {
        if (state[i].cls != SynthClass::PALM) continue;
        int loss = state[i].establishment_year - spec.loss_lead_years;
        if (loss > 0) b.values[i] = static_cast<float>(loss);
    }
    return b;
}

RasterBand dem_map(const SceneSpec& spec) {
    RasterBand b = make_band("elevation", Unit::Meters, spec.grid.size(), 0.0f);
    for (size_t i = 0; i < spec.grid.size(); ++i) {
        int col = static_cast<int>(i % spec.grid.width);
        b.values[i] = static_cast<float>(spec.dem_base_m + spec.dem_ramp_per_px * col);
    }
    return b;
}

std::string generate_scene_set(const SceneSpec& spec, const std::string& out_dir, int workers) {
    spec.check();
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/truth");

    SceneManifest manifest;
    auto add_entry = [&](SceneEntry e) { manifest.entries.push_back(std::move(e)); };

    // Radar scenes (dates spread through each year, descending orbit).
    for (int year : spec.radar_years) {
        RadarYear ry = generate_radar_year(spec, year);
        for (int s = 0; s < static_cast<int>(ry.scenes.size()); ++s) {
            int doy = 1 + (364 * s) / std::max(1, spec.scenes_per_year - 1);
            Date date = civil_from_days(days_from_civil(year, 1, 1) + doy - 1);
            std::string name = "s1_" + std::to_string(year) + "_" +
                               (s < 10 ? "0" : "") + std::to_string(s) + ".tif";
            write_raster(out_dir + "/" + name, ry.scenes[s]);
            SceneEntry e;
            e.path = out_dir + "/" + name;
            e.sensor = Sensor::S1;
            e.date = date;
            e.orbit = Orbit::DESC;
            e.bands = {"vv", "vh"};
            if (spec.emit_incidence) e.incidence_band = "incidence";
            add_entry(e);
        }
    }

    // Optical archive, one scene per month.
    if (spec.optical_start_year > 0) {
        std::vector<std::pair<int, int>> months;
        for (int y = spec.optical_start_year; y <= spec.optical_end_year; ++y)
            for (int m = 1; m <= 12; ++m) months.emplace_back(y, m);
        std::vector<SceneEntry> entries(months.size());
        parallel_for(months.size(), workers, [&](size_t k) {
            auto [y, m] = months[k];
            Raster scene = generate_optical_month(spec, y, m);
            char name[64];
            std::snprintf(name, sizeof(name), "optical_%04d_%02d.tif", y, m);
            write_raster(out_dir + "/" + name, scene);
            SceneEntry e;
            e.path = out_dir + "/" + name;
            e.sensor = y < 2000 ? Sensor::L5 : Sensor::L7;
            e.date = Date{y, m, 15};
            e.orbit = Orbit::NA;
            e.bands = spec.optical_bands;
            e.qa_band = "qa";
            entries[k] = e;
        });
        for (auto& e : entries) add_entry(std::move(e));
    }

    auto write_single = [&](const std::string& rel, RasterBand band) {
        Raster r;
        r.grid = spec.grid;
        r.bands.push_back(std::move(band));
        write_raster(out_dir + "/" + rel, r);
        return out_dir + "/" + rel;
    };

    std::string dem_path = write_single("dem.tif", dem_map(spec));
    std::string mask_path = write_single("mangrove_mask.tif", mangrove_mask(spec));
    std::string loss_path = write_single("lossyear.tif", loss_year_map(spec));
    write_single("truth/truth_palm.tif", truth_palm_mask(spec));
    write_single("truth/truth_extent.tif", truth_extent(spec, spec.ref_year));
    write_single("truth/truth_closure.tif", truth_closure_years(spec));
    write_single("truth/truth_class.tif", truth_class_map(spec));

    SceneEntry dem;
    dem.path = dem_path;
    dem.sensor = Sensor::DEM;
    dem.date = Date{2000, 1, 1};
    dem.bands = {"elevation"};
    add_entry(dem);
    SceneEntry mask;
    mask.path = mask_path;
    mask.sensor = Sensor::MASK;
    mask.date = Date{2010, 1, 1};
    mask.bands = {"mangrove"};
    add_entry(mask);
    SceneEntry loss;
    loss.path = loss_path;
    loss.sensor = Sensor::LOSSYEAR;
    loss.date = Date{spec.ref_year, 1, 1};
    loss.bands = {"lossyear"};
    add_entry(loss);

    std::string manifest_path = out_dir + "/manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

namespace {

json signature_to_json(const ClassSignature& s) {
    return json{{"vv_db", s.vv_db},
                {"vh_db", s.vh_db},
                {"roughness_db", s.roughness_db},
                {"ndvi", s.ndvi},
                {"bsi", s.bsi}};
}

ClassSignature signature_from_json(const json& j, ClassSignature base) {
    if (j.contains("vv_db")) base.vv_db = j["vv_db"];
    if (j.contains("vh_db")) base.vh_db = j["vh_db"];
    if (j.contains("roughness_db")) base.roughness_db = j["roughness_db"];
    if (j.contains("ndvi")) base.ndvi = j["ndvi"];
    if (j.contains("bsi")) base.bsi = j["bsi"];
    return base;
}

}  // namespace

SceneSpec load_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read scene spec '" + path + "'");
    json j = json::parse(in);
    SceneSpec s = default_scene_spec();
    const auto& g = j.at("grid");
    s.grid.epsg = g.at("epsg");
    s.grid.origin_x = g.at("origin_x");
    s.grid.origin_y = g.at("origin_y");
    s.grid.px_size_x = g.at("px_size_x");
    s.grid.px_size_y = g.at("px_size_y");
    s.grid.width = g.at("width");
    s.grid.height = g.at("height");
    if (j.contains("ref_year")) s.ref_year = j["ref_year"];
    if (j.contains("radar_years")) s.radar_years = j["radar_years"].get<std::vector<int>>();
    if (j.contains("scenes_per_year")) s.scenes_per_year = j["scenes_per_year"];
    if (j.contains("optical_start_year")) s.optical_start_year = j["optical_start_year"];
    if (j.contains("optical_end_year")) s.optical_end_year = j["optical_end_year"];
    if (j.contains("optical_bands")) s.optical_bands = j["optical_bands"].get<std::vector<std::string>>();
    if (j.contains("emit_incidence")) s.emit_incidence = j["emit_incidence"];
    if (j.contains("incidence_slope_db_per_deg"))
        s.incidence_slope_db_per_deg = j["incidence_slope_db_per_deg"];
    if (j.contains("background")) s.background = synth_class_from_name(j["background"]);
    if (j.contains("noise")) {
        const auto& nj = j["noise"];
        if (nj.contains("radar_sd_db")) s.noise.radar_sd_db = nj["radar_sd_db"];
        if (nj.contains("optical_sd")) s.noise.optical_sd = nj["optical_sd"];
        if (nj.contains("cloud_rate")) s.noise.cloud_rate = nj["cloud_rate"];
    }
    if (j.contains("closure_lag")) s.closure_lag = j["closure_lag"];
    if (j.contains("loss_lead_years")) s.loss_lead_years = j["loss_lead_years"];
    if (j.contains("dem_base_m")) s.dem_base_m = j["dem_base_m"];
    if (j.contains("dem_ramp_per_px")) s.dem_ramp_per_px = j["dem_ramp_per_px"];
    if (j.contains("seed")) s.seed = j["seed"];
    if (j.contains("classes")) {
        for (const auto& [name, cj] : j["classes"].items()) {
            if (name == "palm_young") s.palm_young = signature_from_json(cj, s.palm_young);
            else {
                SynthClass c = synth_class_from_name(name);
                s.classes[c] = signature_from_json(cj, s.classes[c]);
            }
        }
    }
    for (const auto& pj : j.value("parcels", json::array())) {
        ParcelSpec p;
        p.x0 = pj.at("x0");
        p.y0 = pj.at("y0");
        p.w = pj.at("w");
        p.h = pj.at("h");
        p.cls = synth_class_from_name(pj.at("class"));
        if (pj.contains("establishment_year")) p.establishment_year = pj["establishment_year"];
        s.parcels.push_back(p);
    }
    s.check();
    return s;
}

void save_scene_spec(const std::string& path, const SceneSpec& spec) {
    json j;
    j["grid"] = {{"epsg", spec.grid.epsg},       {"origin_x", spec.grid.origin_x},
                 {"origin_y", spec.grid.origin_y}, {"px_size_x", spec.grid.px_size_x},
                 {"px_size_y", spec.grid.px_size_y}, {"width", spec.grid.width},
                 {"height", spec.grid.height}};
    j["ref_year"] = spec.ref_year;
    j["radar_years"] = spec.radar_years;
    j["scenes_per_year"] = spec.scenes_per_year;
    j["optical_start_year"] = spec.optical_start_year;
    j["optical_end_year"] = spec.optical_end_year;
    j["optical_bands"] = spec.optical_bands;
    j["emit_incidence"] = spec.emit_incidence;
    j["incidence_slope_db_per_deg"] = spec.incidence_slope_db_per_deg;
    j["background"] = synth_class_name(spec.background);
    j["noise"] = {{"radar_sd_db", spec.noise.radar_sd_db},
                  {"optical_sd", spec.noise.optical_sd},
                  {"cloud_rate", spec.noise.cloud_rate}};
    j["closure_lag"] = spec.closure_lag;
    j["loss_lead_years"] = spec.loss_lead_years;
    j["dem_base_m"] = spec.dem_base_m;
    j["dem_ramp_per_px"] = spec.dem_ramp_per_px;
    j["seed"] = spec.seed;
    json classes;
    for (const auto& [c, sig] : spec.classes) classes[synth_class_name(c)] = signature_to_json(sig);
    classes["palm_young"] = signature_to_json(spec.palm_young);
    j["classes"] = classes;
    json parcels = json::array();
    for (const auto& p : spec.parcels) {
        json pj = {{"x0", p.x0}, {"y0", p.y0}, {"w", p.w}, {"h", p.h},
                   {"class", synth_class_name(p.cls)}};
        if (p.cls == SynthClass::PALM) pj["establishment_year"] = p.establishment_year;
        parcels.push_back(pj);
    }
    j["parcels"] = parcels;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scene spec '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace palmmap
