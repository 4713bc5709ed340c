#include "palmmap/classify/stratify.hpp"

#include <cmath>

#include "palmmap/util/rng.hpp"

namespace palmmap {

std::vector<GridCell> partition_grids(const Bbox& aoi_bbox, double side) {
    if (side <= 0.0) throw std::invalid_argument("cell side must be positive");
    if (aoi_bbox.max_x <= aoi_bbox.min_x || aoi_bbox.max_y <= aoi_bbox.min_y)
        throw std::invalid_argument("empty AOI bbox");

    // Snap outward to multiples of side.
    double x0 = std::floor(aoi_bbox.min_x / side) * side;
    double y0 = std::floor(aoi_bbox.min_y / side) * side;
    double x1 = std::ceil(aoi_bbox.max_x / side) * side;
    double y1 = std::ceil(aoi_bbox.max_y / side) * side;
    int cols = static_cast<int>(std::llround((x1 - x0) / side));
    int rows = static_cast<int>(std::llround((y1 - y0) / side));

    std::vector<GridCell> cells;
    cells.reserve(static_cast<size_t>(cols) * rows);
    int id = 0;
    for (int r = 0; r < rows; ++r) {  // northernmost row first
        for (int c = 0; c < cols; ++c) {
            GridCell cell;
            cell.cell_id = id++;
            cell.lon_min = x0 + c * side;
            cell.lat_min = y1 - (r + 1) * side;
            cell.side = side;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<FeatureSample> sample_features(const GridCell& cell, const FeatureStack& stack,
                                           size_t n, uint64_t seed) {
    const GridGeometry& g = stack.grid;
    std::vector<uint32_t> frame;  // row-major pixel indices in the sampling frame
    for (int r = 0; r < g.height; ++r) {
        double cy = g.center_y(r);
        if (cy < cell.lat_min || cy >= cell.lat_min + cell.side) continue;
        for (int c = 0; c < g.width; ++c) {
            size_t i = static_cast<size_t>(r) * g.width + c;
            if (!stack.valid[i]) continue;
            double cx = g.center_x(c);
            if (cx < cell.lon_min || cx >= cell.lon_min + cell.side) continue;
            frame.push_back(static_cast<uint32_t>(i));
        }
    }
    if (frame.empty())
        throw std::runtime_error("cell " + std::to_string(cell.cell_id) + " has no valid pixels");

    // Partial Fisher-Yates: the first `take` entries are a uniform sample
    // without replacement, in draw order.
    auto eng = make_engine(seed, static_cast<uint64_t>(cell.cell_id) + 1);
    size_t take = std::min(n, frame.size());
    for (size_t i = 0; i < take; ++i) {
        size_t j = i + static_cast<size_t>(uniform_index(eng, frame.size() - i));
        std::swap(frame[i], frame[j]);
    }

    std::vector<FeatureSample> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        FeatureSample s;
        s.row = static_cast<int>(frame[i] / g.width);
        s.col = static_cast<int>(frame[i] % g.width);
        stack.get(frame[i], s.features);
        out.push_back(s);
    }
    return out;
}

}  // namespace palmmap
