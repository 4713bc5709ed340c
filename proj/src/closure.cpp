#include "palmmap/age/closure.hpp"

#include "palmmap/util/stats.hpp"

namespace palmmap {

double calibrate_threshold(const std::vector<float>& bsi_values, double percentile,
                           size_t min_values) {
    if (bsi_values.size() < min_values)
        throw std::runtime_error("threshold calibration needs >= " + std::to_string(min_values) +
                                 " BSI values, got " + std::to_string(bsi_values.size()));
    return nearest_rank_percentile(bsi_values, percentile);
}

ClosureResult detect_closure(const MonthlySeries& series, double threshold, int ref_year,
                             int min_months) {
    // Months at or before December of the reference year.
    int last = -1;
    int n_valid = 0;
    for (size_t i = 0; i < series.months.size(); ++i) {
        if (series.months[i].year > ref_year) break;
        last = static_cast<int>(i);
        ++n_valid;
    }
    if (n_valid < min_months) return {ClosureStatus::INSUFFICIENT_DATA, 0};

    int last_above = -1;
    for (int i = last; i >= 0; --i) {
        if (series.months[i].value > threshold) {
            last_above = i;
            break;
        }
    }
    if (last_above < 0) return {ClosureStatus::PRE_ARCHIVE, 0};
    if (last_above == last) return {ClosureStatus::OPEN_CANOPY, 0};
    return {ClosureStatus::DATED, series.months[last_above + 1].year};
}

std::optional<AgeInfo> age_of(const ClosureResult& closure, int ref_year, int closure_age_offset,
                              int archive_start_year) {
    AgeInfo info;
    switch (closure.status) {
        case ClosureStatus::DATED:
            info.age_years = (ref_year - closure.closure_year) + closure_age_offset;
            break;
        case ClosureStatus::OPEN_CANOPY:
            info.age_years = closure_age_offset;
            break;
        case ClosureStatus::PRE_ARCHIVE:
            info.age_years = (ref_year - archive_start_year) + closure_age_offset;
            info.lower_bound = true;
            break;
        case ClosureStatus::INSUFFICIENT_DATA:
            return std::nullopt;
    }
    info.cls = age_class(info.age_years);
    return info;
}

int closure_sentinel(const ClosureResult& r) {
    switch (r.status) {
        case ClosureStatus::DATED: return r.closure_year;
        case ClosureStatus::PRE_ARCHIVE: return kClosurePreArchive;
        case ClosureStatus::OPEN_CANOPY: return kClosureOpenCanopy;
        case ClosureStatus::INSUFFICIENT_DATA: return kClosureInsufficient;
    }
    throw std::logic_error("unhandled closure status");
}

ClosureResult closure_from_sentinel(int v) {
    if (v == kClosurePreArchive) return {ClosureStatus::PRE_ARCHIVE, 0};
    if (v == kClosureOpenCanopy) return {ClosureStatus::OPEN_CANOPY, 0};
    if (v == kClosureInsufficient) return {ClosureStatus::INSUFFICIENT_DATA, 0};
    return {ClosureStatus::DATED, v};
}

}  // namespace palmmap
