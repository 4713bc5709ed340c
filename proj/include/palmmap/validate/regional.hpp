#pragma once

#include <optional>
#include <string>
#include <vector>

#include "palmmap/age/closure.hpp"
#include "palmmap/raster/grid.hpp"

namespace palmmap {

struct RegionStats {
    std::string region;
    double total_ha = 0.0;       // mapped extent area
    double young_ha = 0.0;
    double prime_ha = 0.0;
    double old_ha = 0.0;
    double young_share = 0.0;    // of the dated-plus-bounded area
    double prime_share = 0.0;
    double old_share = 0.0;
    std::optional<double> mean_age_with_bounds;     // PRE_ARCHIVE at its lower-bound age
    std::optional<double> mean_age_dated_only;      // excludes PRE_ARCHIVE
};

struct NamedRegion {
    std::string name;
    const RasterBand* mask;  // 1 inside the region
};

std::vector<RegionStats> regional_stats(const RasterBand& extent, const RasterBand& closure_years,
                                        const std::vector<NamedRegion>& regions,
                                        double pixel_area_m2, int ref_year,
                                        int closure_age_offset,
                                        int archive_start_year = 1984);

struct ProductComparison {
    std::string region;
    double ours_ha = 0.0;
    double other_ha = 0.0;
    double intersection_ha = 0.0;
    double union_ha = 0.0;
    double agreement = 0.0;  // |intersection| / |union|
};

// Area cross-tabulation of our extent against another product already
// resampled to our grid.
std::vector<ProductComparison> compare_products(const RasterBand& our_extent,
                                                const RasterBand& other_extent,
                                                const std::vector<NamedRegion>& regions,
                                                double pixel_area_m2);

}  // namespace palmmap
