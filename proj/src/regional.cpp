#include "palmmap/validate/regional.hpp"

namespace palmmap {

std::vector<RegionStats> regional_stats(const RasterBand& extent, const RasterBand& closure_years,
                                        const std::vector<NamedRegion>& regions,
                                        double pixel_area_m2, int ref_year,
                                        int closure_age_offset, int archive_start_year) {
    if (extent.values.size() != closure_years.values.size())
        throw std::invalid_argument("regional_stats: grids not aligned");
    const double px_ha = pixel_area_m2 / 10000.0;

    std::vector<RegionStats> out;
    for (const auto& region : regions) {
        if (region.mask && region.mask->values.size() != extent.values.size())
            throw std::invalid_argument("regional_stats: region mask not aligned");
        RegionStats rs;
        rs.region = region.name;
        int64_t n_young = 0, n_prime = 0, n_old = 0, n_total = 0;
        double age_sum_all = 0.0, age_sum_dated = 0.0;
        int64_t n_age_all = 0, n_age_dated = 0;
        for (size_t i = 0; i < extent.values.size(); ++i) {
            if (region.mask && region.mask->values[i] != 1.0f) continue;
            if (extent.values[i] != 1.0f) continue;
            ++n_total;
            float cv = closure_years.values[i];
            if (closure_years.is_nodata(cv)) continue;
            ClosureResult r = closure_from_sentinel(static_cast<int>(cv));
            auto info = age_of(r, ref_year, closure_age_offset, archive_start_year);
            if (!info) continue;
            switch (info->cls) {
                case AgeClass::YOUNG: ++n_young; break;
                case AgeClass::PRIME: ++n_prime; break;
                case AgeClass::OLD: ++n_old; break;
            }
            age_sum_all += info->age_years;
            ++n_age_all;
            if (!info->lower_bound) {
                age_sum_dated += info->age_years;
                ++n_age_dated;
            }
        }
        rs.total_ha = n_total * px_ha;
        rs.young_ha = n_young * px_ha;
        rs.prime_ha = n_prime * px_ha;
        rs.old_ha = n_old * px_ha;
        const int64_t n_classed = n_young + n_prime + n_old;
        if (n_classed > 0) {
            rs.young_share = static_cast<double>(n_young) / n_classed;
            rs.prime_share = static_cast<double>(n_prime) / n_classed;
            rs.old_share = static_cast<double>(n_old) / n_classed;
        }
        if (n_age_all > 0) rs.mean_age_with_bounds = age_sum_all / n_age_all;
        if (n_age_dated > 0) rs.mean_age_dated_only = age_sum_dated / n_age_dated;
        out.push_back(std::move(rs));
    }
    return out;
}

std::vector<ProductComparison> compare_products(const RasterBand& our_extent,
                                                const RasterBand& other_extent,
                                                const std::vector<NamedRegion>& regions,
                                                double pixel_area_m2) {
    if (our_extent.values.size() != other_extent.values.size())
        throw std::invalid_argument("compare_products: grids not aligned");
    const double px_ha = pixel_area_m2 / 10000.0;

    std::vector<ProductComparison> out;
    for (const auto& region : regions) {
        ProductComparison pc;
        pc.region = region.name;
        int64_t ours = 0, other = 0, both = 0, either = 0;
        for (size_t i = 0; i < our_extent.values.size(); ++i) {
            if (region.mask && region.mask->values[i] != 1.0f) continue;
            bool a = our_extent.values[i] == 1.0f;
            bool b = other_extent.values[i] == 1.0f;
            ours += a;
            other += b;
            both += a && b;
            either += a || b;
        }
        pc.ours_ha = ours * px_ha;
        pc.other_ha = other * px_ha;
        pc.intersection_ha = both * px_ha;
        pc.union_ha = either * px_ha;
        pc.agreement = either > 0 ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
        out.push_back(pc);
    }
    return out;
}

}  // namespace palmmap
