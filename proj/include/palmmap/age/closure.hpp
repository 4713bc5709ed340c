#pragma once

#include <optional>
#include <vector>

#include "palmmap/optical/series.hpp"

namespace palmmap {

// Sentinel values used in closure-year rasters.
inline constexpr int kClosurePreArchive = 0;
inline constexpr int kClosureOpenCanopy = 9998;
inline constexpr int kClosureInsufficient = 9999;
inline constexpr float kClosureNodata = 65535.0f;

enum class ClosureStatus { DATED, PRE_ARCHIVE, OPEN_CANOPY, INSUFFICIENT_DATA };

struct ClosureResult {
    ClosureStatus status = ClosureStatus::INSUFFICIENT_DATA;
    int closure_year = 0;  // meaningful iff status == DATED
};

// Nearest-rank percentile of BSI values sampled from the mapped extent.
// Requires at least min_values observations.
double calibrate_threshold(const std::vector<float>& bsi_values, double percentile = 95.0,
                           size_t min_values = 100);

// Backward scan of the smoothed series: the most recent month above the
// threshold ends the open-canopy epoch; closure is the first month after it
// at or below the threshold. Months after ref_year are ignored.
ClosureResult detect_closure(const MonthlySeries& series, double threshold, int ref_year,
                             int min_months = 6);

enum class AgeClass { YOUNG, PRIME, OLD };

// Fig-1 class bounds: young < 7, prime 7..15, old > 15.
inline AgeClass age_class(int age_years) {
    if (age_years < 7) return AgeClass::YOUNG;
    if (age_years <= 15) return AgeClass::PRIME;
    return AgeClass::OLD;
}

struct AgeInfo {
    int age_years = 0;
    AgeClass cls = AgeClass::YOUNG;
    bool lower_bound = false;  // PRE_ARCHIVE ages are at-least values
};

// Age at ref_year including the canopy-closure offset (plantations close
// canopy at ~2-3 years). INSUFFICIENT_DATA has no age.
std::optional<AgeInfo> age_of(const ClosureResult& closure, int ref_year, int closure_age_offset,
                              int archive_start_year = 1984);

int closure_sentinel(const ClosureResult& r);
ClosureResult closure_from_sentinel(int v);

}  // namespace palmmap
