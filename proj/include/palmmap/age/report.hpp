#pragma once

#include <map>
#include <optional>

#include "palmmap/age/closure.hpp"
#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Hectares of newly closed plantations per year within a region.
std::map<int, double> expansion_series(const RasterBand& closure_years,
                                       const RasterBand& region_mask, double pixel_area_m2);

enum class LossCheck { CONSISTENT, EARLY_CLOSURE, NO_LOSS_RECORD };

// Forest-loss products should see the clearing at or before our canopy
// closure; a closure before the recorded loss is suspicious.
inline LossCheck crosscheck_loss(int closure_year, std::optional<int> loss_year) {
    if (!loss_year) return LossCheck::NO_LOSS_RECORD;
    return *loss_year <= closure_year ? LossCheck::CONSISTENT : LossCheck::EARLY_CLOSURE;
}

struct LossSummary {
    int64_t consistent = 0;
    int64_t early_closure = 0;
    int64_t no_loss_record = 0;
};

LossSummary crosscheck_loss_map(const RasterBand& closure_years, const RasterBand& loss_years);

}  // namespace palmmap
