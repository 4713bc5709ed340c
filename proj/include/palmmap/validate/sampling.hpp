#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

enum class Stratum { MAPPED_PALM, MAPPED_OTHER };
enum class Allocation { EQUAL, PROPORTIONAL };

struct StratumSample {
    Stratum stratum = Stratum::MAPPED_PALM;
    int region_id = 0;
    std::vector<std::pair<int, int>> locations;  // (row, col), unique
    double weight = 0.0;                         // stratum area fraction of the region
};

// Draws a stratified random sample over the mapped-palm / mapped-other
// strata of the extent map (optionally restricted to region_mask == 1).
// Deterministic for a given seed; equal allocation gives n_total/2 per
// stratum clamped to the stratum size.
std::vector<StratumSample> stratified_sample(const GridGeometry& grid, const RasterBand& extent,
                                             const RasterBand* region_mask, int region_id,
                                             size_t n_total, Allocation allocation,
                                             uint64_t seed);

enum class Vote { PALM, NOT_PALM, UNSURE };
enum class RefLabel { PALM, NOT_PALM, UNDECIDED };

struct Interpretation {
    int64_t location_id = 0;
    std::vector<Vote> votes;
};

// Strict majority among the non-unsure votes; ties and all-unsure are
// undecided (excluded from the confusion matrix).
RefLabel aggregate_votes(const Interpretation& interp);

}  // namespace palmmap
