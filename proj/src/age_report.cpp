#include "palmmap/age/report.hpp"

namespace palmmap {

std::map<int, double> expansion_series(const RasterBand& closure_years,
                                       const RasterBand& region_mask, double pixel_area_m2) {
    if (closure_years.values.size() != region_mask.values.size())
        throw std::invalid_argument("expansion_series: grids not aligned");
    std::map<int, double> ha_by_year;
    for (size_t i = 0; i < closure_years.values.size(); ++i) {
        if (region_mask.values[i] != 1.0f) continue;
        float v = closure_years.values[i];
        if (closure_years.is_nodata(v)) continue;
        ClosureResult r = closure_from_sentinel(static_cast<int>(v));
        if (r.status != ClosureStatus::DATED) continue;
        ha_by_year[r.closure_year] += pixel_area_m2 / 10000.0;
    }
    return ha_by_year;
}

LossSummary crosscheck_loss_map(const RasterBand& closure_years, const RasterBand& loss_years) {
    if (closure_years.values.size() != loss_years.values.size())
        throw std::invalid_argument("crosscheck_loss_map: grids not aligned");
    LossSummary s;
    for (size_t i = 0; i < closure_years.values.size(); ++i) {
        float v = closure_years.values[i];
        if (closure_years.is_nodata(v)) continue;
        ClosureResult r = closure_from_sentinel(static_cast<int>(v));
        if (r.status != ClosureStatus::DATED) continue;
        std::optional<int> loss;
        float lv = loss_years.values[i];
        if (!loss_years.is_nodata(lv) && lv > 0.0f) loss = static_cast<int>(lv);
        switch (crosscheck_loss(r.closure_year, loss)) {
            case LossCheck::CONSISTENT: ++s.consistent; break;
            case LossCheck::EARLY_CLOSURE: ++s.early_closure; break;
            case LossCheck::NO_LOSS_RECORD: ++s.no_loss_record; break;
        }
    }
    return s;
}

}  // namespace palmmap
