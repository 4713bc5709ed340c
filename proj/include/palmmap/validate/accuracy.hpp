#pragma once

#include <vector>

namespace palmmap {

struct ConfusionMatrix {
    int64_t tp = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tn = 0;

    int64_t total() const { return tp + fp + fn + tn; }
};

// Standard 2x2 counts with palm as the positive class. Undecided
// interpretations must be excluded upstream.
ConfusionMatrix confusion(const std::vector<bool>& ref_labels, const std::vector<bool>& map_labels);

struct IntervalEstimate {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Balanced accuracy (mean of sensitivity and specificity) with a normal-
// approximation CI on the mean of the two independent binomial rates,
// clamped to [0,1].
IntervalEstimate balanced_accuracy_ci(const ConfusionMatrix& cm, double level = 0.95);

struct StratumCounts {
    int64_t palm = 0;  // reference-palm count in the stratum sample
    int64_t n = 0;     // stratum sample size
};

// Design-based (stratified) area estimate: p_hat = sum_h W_h * p_h with
// SE^2 = sum_h W_h^2 p_h (1-p_h) / (n_h - 1), scaled by the region area.
IntervalEstimate adjusted_area_ci(const std::vector<StratumCounts>& per_stratum,
                                  const std::vector<double>& weights, double region_area_ha,
                                  double level = 0.95);

}  // namespace palmmap
