#include "palmmap/optical/series.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "palmmap/raster/geotiff.hpp"
#include "palmmap/raster/tiling.hpp"
#include "palmmap/util/stats.hpp"

namespace palmmap {

namespace fs = std::filesystem;
using nlohmann::json;

IndexKind index_kind_from_name(const std::string& s) {
    if (s == "ndvi" || s == "NDVI") return IndexKind::NDVI;
    if (s == "bsi" || s == "BSI") return IndexKind::BSI;
    throw std::invalid_argument("unknown index '" + s + "'");
}

std::string index_kind_name(IndexKind k) { return k == IndexKind::NDVI ? "ndvi" : "bsi"; }

namespace {

constexpr float kIndexNodata = -9999.0f;

struct SceneBands {
    const RasterBand* blue = nullptr;
    const RasterBand* red = nullptr;
    const RasterBand* nir = nullptr;
    const RasterBand* swir1 = nullptr;
    const RasterBand* qa = nullptr;
};

SceneBands resolve_bands(const Raster& raster, const SceneEntry& entry, IndexKind kind) {
    SceneBands b;
    for (const auto& name : entry.bands) {
        const RasterBand* band = &raster.band(name);
        if (name == "blue") b.blue = band;
        else if (name == "red") b.red = band;
        else if (name == "nir") b.nir = band;
        else if (name == "swir1") b.swir1 = band;
    }
    if (entry.qa_band) b.qa = &raster.band(*entry.qa_band);
    if (!b.red || !b.nir)
        throw std::runtime_error("scene '" + entry.path + "' lacks red/nir bands");
    if (kind == IndexKind::BSI && (!b.swir1 || !b.blue))
        throw std::runtime_error("scene '" + entry.path + "' lacks swir1/blue bands needed for BSI");
    return b;
}

float index_at(const SceneBands& b, IndexKind kind, size_t i, const QaSpec& qa) {
    if (b.qa) {
        uint16_t q = static_cast<uint16_t>(b.qa->values[i]);
        if (!qa_mask(q, qa)) return std::nanf("");
    }
    auto val = [i](const RasterBand* band) -> double {
        float v = band->values[i];
        return band->is_nodata(v) ? std::nan("") : v;
    };
    double red = val(b.red), nir = val(b.nir);
    if (std::isnan(red) || std::isnan(nir)) return std::nanf("");
    double v;
    if (kind == IndexKind::NDVI) {
        v = ndvi(nir, red);
    } else {
        double swir1 = val(b.swir1), blue = val(b.blue);
        if (std::isnan(swir1) || std::isnan(blue)) return std::nanf("");
        v = bsi(swir1, red, nir, blue);
    }
    return static_cast<float>(v);
}

}  // namespace

IndexSeries assemble_series(const SceneManifest& manifest, int row, int col, IndexKind kind,
                            const QaSpec& qa) {
    qa.check();
    IndexSeries out;
    bool any = false;
    for (const auto& e : manifest.entries) {
        if (!is_optical(e.sensor)) continue;
        any = true;
        Raster raster = read_raster(e.path);
        SceneBands b = resolve_bands(raster, e, kind);
        size_t i = static_cast<size_t>(row) * raster.grid.width + col;
        float v = index_at(b, kind, i, qa);
        IndexSample s;
        s.date = e.date;
        s.ordinal = e.ordinal;
        s.valid = !std::isnan(v);
        s.value = s.valid ? v : 0.0f;
        out.samples.push_back(s);
    }
    if (!any) throw std::runtime_error("no optical scenes in manifest");
    return out;
}

MonthlySeries rolling_median(const IndexSeries& series, int window_days, int min_obs) {
    MonthlySeries out;
    if (series.samples.empty()) return out;
    const int half_days = (window_days + 1) / 2;

    std::vector<std::pair<int64_t, float>> valid;  // (day number, value)
    valid.reserve(series.samples.size());
    for (const auto& s : series.samples)
        if (s.valid) valid.emplace_back(to_days(s.date), s.value);
    if (valid.empty()) return out;

    const Date first = series.samples.front().date;
    const Date last = series.samples.back().date;
    const int m0 = month_index(first.year, first.month);
    const int m1 = month_index(last.year, last.month);

    size_t lo = 0, hi = 0;
    std::vector<float> window;
    for (int m = m0; m <= m1; ++m) {
        int year = m / 12, month = m % 12 + 1;
        int64_t mid = days_from_civil(year, month, 15);
        while (lo < valid.size() && valid[lo].first < mid - half_days) ++lo;
        if (hi < lo) hi = lo;
        while (hi < valid.size() && valid[hi].first <= mid + half_days) ++hi;
        int n = static_cast<int>(hi - lo);
        if (n < min_obs) continue;
        window.assign(n, 0.0f);
        for (size_t k = lo; k < hi; ++k) window[k - lo] = valid[k].second;
        MonthEntry e;
        e.year = year;
        e.month = month;
        e.value = static_cast<float>(median_inplace(window));
        e.n_obs = n;
        out.months.push_back(e);
    }
    return out;
}

IndexSeries SeriesTable::pixel_series(int row, int col) const {
    IndexSeries out;
    size_t i = static_cast<size_t>(row) * grid.width + col;
    for (size_t s = 0; s < dates.size(); ++s) {
        IndexSample smp;
        smp.date = dates[s];
        smp.ordinal = static_cast<int>(s);
        float v = values[s][i];
        smp.valid = !std::isnan(v);
        smp.value = smp.valid ? v : 0.0f;
        out.samples.push_back(smp);
    }
    return out;
}

SeriesTable assemble_series_all(const SceneManifest& manifest, IndexKind kind, const QaSpec& qa) {
    qa.check();
    SeriesTable table;
    bool first = true;
    for (const auto& e : manifest.entries) {
        if (!is_optical(e.sensor)) continue;
        Raster raster = read_raster(e.path);
        if (first) {
            table.grid = raster.grid;
            first = false;
        } else if (!(raster.grid == table.grid)) {
            throw std::runtime_error("optical scenes are not co-registered to one grid");
        }
        SceneBands b = resolve_bands(raster, e, kind);
        std::vector<float> vals(table.grid.size());
        for (size_t i = 0; i < vals.size(); ++i) vals[i] = index_at(b, kind, i, qa);
        table.dates.push_back(e.date);
        table.values.push_back(std::move(vals));
    }
    if (first) throw std::runtime_error("no optical scenes in manifest");
    return table;
}

std::string SeriesStore::block_path(int tx, int ty) const {
    return dir + "/block_" + std::to_string(ty) + "_" + std::to_string(tx) + ".bin";
}

SeriesStore write_series_store(const std::string& dir, const SeriesTable& table, int window_days,
                               int min_obs, int tile, int workers) {
    fs::create_directories(dir);
    SeriesStore store;
    store.grid = table.grid;
    store.dir = dir;
    store.tile = tile;
    store.start_year = table.dates.front().year;
    const Date last = table.dates.back();
    store.n_months = month_index(last.year, last.month) - month_index(store.start_year, 1) + 1;
    const int base = month_index(store.start_year, 1);

    for_each_tile(table.grid, tile, 0, workers, [&](const TileWindow& t) {
        std::vector<float> block(static_cast<size_t>(t.w) * t.h * store.n_months,
                                 std::nanf(""));
        for (int r = 0; r < t.h; ++r) {
            for (int c = 0; c < t.w; ++c) {
                IndexSeries s = table.pixel_series(t.y0 + r, t.x0 + c);
                MonthlySeries ms = rolling_median(s, window_days, min_obs);
                float* dst = block.data() +
                             (static_cast<size_t>(r) * t.w + c) * store.n_months;
                for (const auto& e : ms.months) {
                    int idx = month_index(e.year, e.month) - base;
                    if (idx >= 0 && idx < store.n_months) dst[idx] = e.value;
                }
            }
        }
        std::ofstream out(store.block_path(t.x0 / tile, t.y0 / tile), std::ios::binary);
        out.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(block.size() * sizeof(float)));
        if (!out) throw std::runtime_error("failed writing series block in '" + dir + "'");
    });

    json meta;
    meta["grid"] = {{"epsg", store.grid.epsg},       {"origin_x", store.grid.origin_x},
                    {"origin_y", store.grid.origin_y}, {"px_size_x", store.grid.px_size_x},
                    {"px_size_y", store.grid.px_size_y}, {"width", store.grid.width},
                    {"height", store.grid.height}};
    meta["start_year"] = store.start_year;
    meta["n_months"] = store.n_months;
    meta["tile"] = store.tile;
    std::ofstream mo(dir + "/meta.json");
    mo << meta.dump(2) << "\n";
    return store;
}

SeriesStore open_series_store(const std::string& dir) {
    std::ifstream in(dir + "/meta.json");
    if (!in) throw std::runtime_error("no series store at '" + dir + "' (missing meta.json)");
    json meta = json::parse(in);
    SeriesStore store;
    store.dir = dir;
    const auto& g = meta.at("grid");
    store.grid.epsg = g.at("epsg");
    store.grid.origin_x = g.at("origin_x");
    store.grid.origin_y = g.at("origin_y");
    store.grid.px_size_x = g.at("px_size_x");
    store.grid.px_size_y = g.at("px_size_y");
    store.grid.width = g.at("width");
    store.grid.height = g.at("height");
    store.start_year = meta.at("start_year");
    store.n_months = meta.at("n_months");
    store.tile = meta.at("tile");
    return store;
}

std::vector<float> read_series_block(const SeriesStore& store, int tx, int ty, int* w, int* h) {
    int x0 = tx * store.tile, y0 = ty * store.tile;
    *w = std::min(store.tile, store.grid.width - x0);
    *h = std::min(store.tile, store.grid.height - y0);
    std::ifstream in(store.block_path(tx, ty), std::ios::binary);
    if (!in) throw std::runtime_error("missing series block " + store.block_path(tx, ty));
    std::vector<float> block(static_cast<size_t>(*w) * *h * store.n_months);
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(block.size() * sizeof(float)));
    if (!in) throw std::runtime_error("short read on " + store.block_path(tx, ty));
    return block;
}

MonthlySeries monthly_from_block(const SeriesStore& store, const std::vector<float>& block,
                                 int pixel_in_tile) {
    MonthlySeries out;
    const float* src = block.data() + static_cast<size_t>(pixel_in_tile) * store.n_months;
    const int base = month_index(store.start_year, 1);
    for (int m = 0; m < store.n_months; ++m) {
        if (std::isnan(src[m])) continue;
        MonthEntry e;
        e.year = (base + m) / 12;
        e.month = (base + m) % 12 + 1;
        e.value = src[m];
        e.n_obs = 0;  // counts are not persisted in blocks
        out.months.push_back(e);
    }
    return out;
}

RasterBand annual_index_median(const SceneManifest& manifest, IndexKind kind, const QaSpec& qa,
                               int year, int workers) {
    qa.check();
    SceneManifest sub;
    for (const auto& e : manifest.entries)
        if (is_optical(e.sensor) && e.date.year == year) sub.entries.push_back(e);
    if (sub.entries.empty())
        throw std::runtime_error("no optical scenes for year " + std::to_string(year));
    SeriesTable table = assemble_series_all(sub, kind, qa);

    RasterBand out;
    out.name = index_kind_name(kind);
    out.unit = Unit::Index;
    out.nodata = kIndexNodata;
    out.values.assign(table.grid.size(), kIndexNodata);
    for_each_tile(table.grid, 256, 0, workers, [&](const TileWindow& t) {
        std::vector<float> vals;
        for (int r = t.y0; r < t.y0 + t.h; ++r) {
            for (int c = t.x0; c < t.x0 + t.w; ++c) {
                size_t i = static_cast<size_t>(r) * table.grid.width + c;
                vals.clear();
                for (const auto& scene : table.values) {
                    float v = scene[i];
                    if (!std::isnan(v)) vals.push_back(v);
                }
                if (!vals.empty()) out.values[i] = static_cast<float>(median_inplace(vals));
            }
        }
    });
    return out;
}

}  // namespace palmmap
