#include "palmmap/composite/composite.hpp"

#include <algorithm>
#include <cmath>

#include "palmmap/raster/geotiff.hpp"
#include "palmmap/util/stats.hpp"
#include "palmmap/raster/tiling.hpp"

namespace palmmap {

namespace {
constexpr float kDbNodata = -9999.0f;
}

double trimmed_mean(std::span<const float> values, double trim_fraction) {
    if (trim_fraction < 0.0 || trim_fraction >= 1.0)
        throw std::invalid_argument("trim_fraction must be in [0,1)");
    if (values.empty()) return std::nan("");
    std::vector<float> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    size_t drop = static_cast<size_t>(std::floor(trim_fraction * static_cast<double>(v.size())));
    double sum = 0.0;
    for (size_t i = drop; i < v.size(); ++i) sum += v[i];
    return sum / static_cast<double>(v.size() - drop);
}

double estimate_angle_slope(const std::vector<std::pair<double, double>>& db_by_deg) {
    if (db_by_deg.size() < 10)
        throw std::invalid_argument("angle slope fit needs >= 10 (dB, degree) pairs; "
                                    "use the fixed default slope instead");
    double lo = db_by_deg[0].second, hi = db_by_deg[0].second;
    for (const auto& [db, deg] : db_by_deg) {
        lo = std::min(lo, deg);
        hi = std::max(hi, deg);
    }
    if (hi - lo < 5.0)
        throw std::invalid_argument("angle slope fit needs >= 5 degrees of incidence spread; "
                                    "use the fixed default slope instead");
    std::vector<std::pair<double, double>> xy;
    xy.reserve(db_by_deg.size());
    for (const auto& [db, deg] : db_by_deg) xy.emplace_back(deg, db);
    return ols_slope(xy);
}

RasterBand byte_scale(const RasterBand& db_band, double lo, double hi) {
    if (lo >= hi) throw std::invalid_argument("byte_scale: lo must be < hi");
    RasterBand out;
    out.name = db_band.name + "_byte";
    out.unit = Unit::Byte;
    out.values.resize(db_band.values.size());
    for (size_t i = 0; i < db_band.values.size(); ++i) {
        float v = db_band.values[i];
        if (db_band.is_nodata(v)) {
            out.values[i] = 0.0f;
            continue;
        }
        double t = (v - lo) / (hi - lo);
        t = std::clamp(t, 0.0, 1.0);
        out.values[i] = static_cast<float>(std::floor(255.0 * t + 0.5));
    }
    return out;
}

namespace {

struct SceneData {
    Raster raster;
    const RasterBand* vv = nullptr;
    const RasterBand* vh = nullptr;
    const RasterBand* inc = nullptr;
    Orbit orbit = Orbit::DESC;
};

// Deterministic subsample of (dB, degree) pairs for the per-orbit slope fit.
std::vector<std::pair<double, double>> slope_pairs(const std::vector<SceneData>& scenes, Orbit orbit,
                                                   size_t target) {
    std::vector<std::pair<double, double>> pairs;
    size_t total = 0;
    for (const auto& s : scenes)
        if (s.orbit == orbit && s.inc) total += s.raster.grid.size();
    if (total == 0) return pairs;
    size_t stride = std::max<size_t>(1, total / target);
    for (const auto& s : scenes) {
        if (s.orbit != orbit || !s.inc) continue;
        for (size_t i = 0; i < s.raster.grid.size(); i += stride) {
            float db = s.vv->values[i];
            float th = s.inc->values[i];
            if (s.vv->is_nodata(db) || s.inc->is_nodata(th)) continue;
            pairs.emplace_back(db, th);
        }
    }
    return pairs;
}

}  // namespace

AnnualComposite build_annual_composite(const SceneManifest& manifest, int year,
                                       const CompositeParams& params) {
    std::vector<SceneData> scenes;
    for (const auto& e : manifest.entries) {
        if (e.sensor != Sensor::S1 || e.date.year != year) continue;
        SceneData s;
        s.raster = read_raster(e.path);
        s.orbit = e.orbit;
        for (const auto& name : e.bands) {
            const RasterBand& b = s.raster.band(name);
            std::string lower = name;
            std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
            if (lower.find("vv") != std::string::npos && !s.vv) s.vv = &b;
            else if (lower.find("vh") != std::string::npos && !s.vh) s.vh = &b;
        }
        if (e.incidence_band) s.inc = &s.raster.band(*e.incidence_band);
        if (!s.vv || !s.vh)
            throw std::runtime_error("scene '" + e.path + "' lacks VV/VH bands");
        scenes.push_back(std::move(s));
    }
    if (scenes.empty())
        throw std::runtime_error("no S1 scenes for year " + std::to_string(year) + " in manifest");

    const GridGeometry grid = scenes.front().raster.grid;
    for (const auto& s : scenes)
        if (!(s.raster.grid == grid))
            throw std::runtime_error("S1 scenes are not co-registered to one grid");

    // Slope per orbit direction, fitted on VV (shared with VH; the angular
    // trend of C-band land backscatter differs little between polarizations).
    std::map<std::string, double> slope_by_orbit;
    for (Orbit orbit : {Orbit::ASC, Orbit::DESC}) {
        bool present = false;
        for (const auto& s : scenes) present |= (s.orbit == orbit);
        if (!present) continue;
        double slope = params.default_slope;
        if (params.fit_slope) {
            auto pairs = slope_pairs(scenes, orbit, 100000);
            try {
                slope = estimate_angle_slope(pairs);
            } catch (const std::invalid_argument&) {
                slope = params.default_slope;
            }
        }
        slope_by_orbit[orbit_name(orbit)] = slope;
    }

    const size_t n = grid.size();
    Raster out;
    out.grid = grid;
    out.bands.push_back(make_band("vv_mean", Unit::Db, n, kDbNodata, kDbNodata));
    out.bands.push_back(make_band("vh_mean", Unit::Db, n, kDbNodata, kDbNodata));
    out.bands.push_back(make_band("vhvv_diff", Unit::Db, n, kDbNodata, kDbNodata));

    RasterBand& vv_mean = out.bands[0];
    RasterBand& vh_mean = out.bands[1];
    RasterBand& diff = out.bands[2];
    RasterBand valid = make_band("valid", Unit::Flag, n, 0.0f);

    for_each_tile(grid, params.tile, 0, params.workers, [&](const TileWindow& t) {
        std::vector<float> vv_obs, vh_obs;
        vv_obs.reserve(scenes.size());
        vh_obs.reserve(scenes.size());
        for (int r = t.y0; r < t.y0 + t.h; ++r) {
            for (int c = t.x0; c < t.x0 + t.w; ++c) {
                const size_t i = static_cast<size_t>(r) * grid.width + c;
                vv_obs.clear();
                vh_obs.clear();
                for (const auto& s : scenes) {
                    const double slope = slope_by_orbit.at(orbit_name(s.orbit));
                    double theta = params.theta_ref;
                    bool have_theta = false;
                    if (s.inc && !s.inc->is_nodata(s.inc->values[i])) {
                        theta = s.inc->values[i];
                        have_theta = true;
                    }
                    float vv = s.vv->values[i];
                    if (!s.vv->is_nodata(vv)) {
                        double v = have_theta ? normalize_incidence(vv, theta, params.theta_ref, slope) : vv;
                        vv_obs.push_back(static_cast<float>(v));
                    }
                    float vh = s.vh->values[i];
                    if (!s.vh->is_nodata(vh)) {
                        double v = have_theta ? normalize_incidence(vh, theta, params.theta_ref, slope) : vh;
                        vh_obs.push_back(static_cast<float>(v));
                    }
                }
                double mv = trimmed_mean(vv_obs, params.trim_fraction);
                double mh = trimmed_mean(vh_obs, params.trim_fraction);
                if (std::isnan(mv) || std::isnan(mh)) continue;
                vv_mean.values[i] = static_cast<float>(mv);
                vh_mean.values[i] = static_cast<float>(mh);
                diff.values[i] = static_cast<float>(mh - mv);
                valid.values[i] = 1.0f;
            }
        }
    });

    RasterBand vvb = byte_scale(vv_mean, params.vv_range.lo, params.vv_range.hi);
    vvb.name = "vv_byte";
    RasterBand vhb = byte_scale(vh_mean, params.vh_range.lo, params.vh_range.hi);
    vhb.name = "vh_byte";
    RasterBand dfb = byte_scale(diff, params.diff_range.lo, params.diff_range.hi);
    dfb.name = "diff_byte";
    out.bands.push_back(std::move(vvb));
    out.bands.push_back(std::move(vhb));
    out.bands.push_back(std::move(dfb));
    out.bands.push_back(std::move(valid));

    AnnualComposite result;
    result.raster = std::move(out);
    result.info.year = year;
    result.info.n_scenes = static_cast<int>(scenes.size());
    result.info.slope_by_orbit = slope_by_orbit;
    result.info.params = params;
    return result;
}

}  // namespace palmmap
