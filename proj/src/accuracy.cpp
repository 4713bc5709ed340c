#include "palmmap/validate/accuracy.hpp"

#include <cmath>
#include <stdexcept>

#include "palmmap/util/stats.hpp"

namespace palmmap {

ConfusionMatrix confusion(const std::vector<bool>& ref_labels,
                          const std::vector<bool>& map_labels) {
    if (ref_labels.size() != map_labels.size())
        throw std::invalid_argument("confusion: label vectors differ in length");
    if (ref_labels.empty()) throw std::invalid_argument("confusion: empty input");
    ConfusionMatrix cm;
    for (size_t i = 0; i < ref_labels.size(); ++i) {
        if (ref_labels[i] && map_labels[i]) ++cm.tp;
        else if (!ref_labels[i] && map_labels[i]) ++cm.fp;
        else if (ref_labels[i] && !map_labels[i]) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

IntervalEstimate balanced_accuracy_ci(const ConfusionMatrix& cm, double level) {
    const int64_t n_pos = cm.tp + cm.fn;
    const int64_t n_neg = cm.tn + cm.fp;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("balanced accuracy needs both reference classes present");
    const double sens = static_cast<double>(cm.tp) / static_cast<double>(n_pos);
    const double spec = static_cast<double>(cm.tn) / static_cast<double>(n_neg);
    const double ba = 0.5 * (sens + spec);
    const double var = (sens * (1.0 - sens) / static_cast<double>(n_pos) +
                        spec * (1.0 - spec) / static_cast<double>(n_neg)) / 4.0;
    const double half = z_for_level(level) * std::sqrt(var);
    IntervalEstimate e;
    e.value = ba;
    e.lo = std::max(0.0, ba - half);
    e.hi = std::min(1.0, ba + half);
    return e;
}

IntervalEstimate adjusted_area_ci(const std::vector<StratumCounts>& per_stratum,
                                  const std::vector<double>& weights, double region_area_ha,
                                  double level) {
    if (per_stratum.size() != weights.size())
        throw std::invalid_argument("adjusted_area_ci: counts/weights size mismatch");
    if (per_stratum.empty()) throw std::invalid_argument("adjusted_area_ci: no strata");
    double p_hat = 0.0, var = 0.0;
    for (size_t h = 0; h < per_stratum.size(); ++h) {
        const auto& s = per_stratum[h];
        if (s.n < 2)
            throw std::invalid_argument("adjusted_area_ci: stratum sample size must be >= 2");
        double p = static_cast<double>(s.palm) / static_cast<double>(s.n);
        p_hat += weights[h] * p;
        var += weights[h] * weights[h] * p * (1.0 - p) / static_cast<double>(s.n - 1);
    }
    const double half = z_for_level(level) * std::sqrt(var) * region_area_ha;
    IntervalEstimate e;
    e.value = p_hat * region_area_ha;
    e.lo = std::max(0.0, e.value - half);
    e.hi = e.value + half;
    return e;
}

}  // namespace palmmap
