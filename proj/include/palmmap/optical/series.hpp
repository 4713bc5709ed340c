#pragma once

#include <string>
#include <vector>

#include "palmmap/optical/indices.hpp"
#include "palmmap/raster/manifest.hpp"
#include "palmmap/raster/grid.hpp"
#include "palmmap/util/date.hpp"

namespace palmmap {

enum class IndexKind { NDVI, BSI };

IndexKind index_kind_from_name(const std::string& s);
std::string index_kind_name(IndexKind k);

// One observation of a spectral index at a pixel. Samples are kept for
// cloudy dates too, flagged invalid, so series length always equals the
// scene count.
struct IndexSample {
    Date date;
    float value = 0.0f;
    bool valid = false;
    int ordinal = 0;  // manifest position; orders duplicate dates
};

struct IndexSeries {
    std::vector<IndexSample> samples;  // ordered by (date, ordinal)
};

struct MonthEntry {
    int year = 0;
    int month = 0;
    float value = 0.0f;
    int n_obs = 0;
};

// Only months that met the minimum-observation rule are present.
struct MonthlySeries {
    std::vector<MonthEntry> months;  // strictly increasing (year, month)
};

// Index series for one pixel, one sample per optical scene in the manifest.
// Slow path (reopens each scene); the batch table below serves the stages.
IndexSeries assemble_series(const SceneManifest& manifest, int row, int col, IndexKind kind,
                            const QaSpec& qa);

// 12-month centered rolling median on a monthly grid: for each calendar
// month in the series span, the median of valid samples within +/-183 days
// of the 15th, emitted only when at least min_obs observations contribute.
MonthlySeries rolling_median(const IndexSeries& series, int window_days = 365, int min_obs = 3);

// All-pixel series table held in memory: per-scene index rasters stacked
// over a common grid.
struct SeriesTable {
    GridGeometry grid;
    std::vector<Date> dates;            // one per scene, (date, ordinal)-sorted
    std::vector<std::vector<float>> values;  // [scene][pixel], NaN = invalid
    IndexSeries pixel_series(int row, int col) const;
};

SeriesTable assemble_series_all(const SceneManifest& manifest, IndexKind kind, const QaSpec& qa);

// Monthly-median block store written by the indices stage and scanned by
// the age stage. Layout: meta.json plus per-tile binary blocks of float32,
// pixel-major ([pixel][month], row-major pixels), NaN = month not emitted.
struct SeriesStore {
    GridGeometry grid;
    int start_year = 0;   // month grid starts at January of this year
    int n_months = 0;
    int tile = 256;
    std::string dir;

    int months_per_pixel() const { return n_months; }
    std::string block_path(int tx, int ty) const;
};

SeriesStore write_series_store(const std::string& dir, const SeriesTable& table, int window_days,
                               int min_obs, int tile, int workers);
SeriesStore open_series_store(const std::string& dir);

// Reads one tile's block: w*h pixels (row-major within the tile core),
// n_months floats each.
std::vector<float> read_series_block(const SeriesStore& store, int tx, int ty, int* w, int* h);

MonthlySeries monthly_from_block(const SeriesStore& store, const std::vector<float>& block,
                                 int pixel_in_tile);

// Median composite of an index over one calendar year (used for the NDVI
// post-classification filter). Pixels with no valid observation -> nodata.
RasterBand annual_index_median(const SceneManifest& manifest, IndexKind kind, const QaSpec& qa,
                               int year, int workers);

}  // namespace palmmap
