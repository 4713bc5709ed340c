#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace palmmap {

// z for a two-sided 95% interval, pinned rather than derived so report
// numbers do not drift with the inverse-CDF implementation.
inline constexpr double kZ95 = 1.959964;

// Acklam's rational approximation of the standard normal quantile,
// |relative error| < 1.2e-9. Used for non-default confidence levels.
double inverse_normal_cdf(double p);

inline double z_for_level(double level) {
    if (level <= 0.0 || level >= 1.0) throw std::invalid_argument("confidence level must be in (0,1)");
    if (std::abs(level - 0.95) < 1e-12) return kZ95;
    return inverse_normal_cdf(0.5 + level / 2.0);
}

// Median with the usual mid-mean for even counts. Mutates its argument.
double median_inplace(std::vector<float>& v);

// Nearest-rank percentile of an unsorted value set: the ceil(p/100*n)-th
// smallest element. p=100 returns the maximum.
double nearest_rank_percentile(std::vector<float> values, double percentile);

// Ordinary least-squares slope of y on x.
double ols_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace palmmap
