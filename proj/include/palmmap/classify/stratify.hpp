#pragma once

#include <cstdint>
#include <vector>

#include "palmmap/classify/features.hpp"

namespace palmmap {

// One cell of the regular analysis grid (5-degree cells at production
// scale; the side is in the AOI's map units and configurable for desk-scale
// scenes). lon_min/lat_min are the cell's lower-left corner.
struct GridCell {
    int cell_id = 0;
    double lon_min = 0.0;
    double lat_min = 0.0;
    double side = 5.0;

    bool contains(double x, double y) const {
        return x >= lon_min && x < lon_min + side && y >= lat_min && y < lat_min + side;
    }
};

struct Bbox {
    double min_x, min_y, max_x, max_y;
};

// Snaps the bbox outward to multiples of `side` and returns row-major cells
// (northernmost row first) covering it. Cells are disjoint and cover the
// snapped bbox exactly.
std::vector<GridCell> partition_grids(const Bbox& aoi_bbox, double side = 5.0);

inline Bbox grid_bbox(const GridGeometry& g) {
    double x1 = g.origin_x + g.px_size_x * g.width;
    double y1 = g.origin_y + g.px_size_y * g.height;
    return Bbox{std::min(g.origin_x, x1), std::min(g.origin_y, y1), std::max(g.origin_x, x1),
                std::max(g.origin_y, y1)};
}

struct FeatureSample {
    int row = 0;
    int col = 0;
    FeatureVector features{};
};

// Uniform sample without replacement of valid pixels whose centers fall in
// the cell; all of them if fewer than n. Deterministic for a given seed.
std::vector<FeatureSample> sample_features(const GridCell& cell, const FeatureStack& stack,
                                           size_t n, uint64_t seed);

}  // namespace palmmap
