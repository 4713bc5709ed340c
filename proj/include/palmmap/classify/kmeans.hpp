#pragma once

#include <string>
#include <vector>

#include "palmmap/classify/stratify.hpp"

namespace palmmap {

// Per-cell k-means model in standardized feature space, with the number of
// clusters chosen automatically in [k_min, k_max] by the Calinski-Harabasz
// index (ties go to the smaller k).
struct ClusterModel {
    int cell_id = 0;
    int k = 0;
    std::vector<FeatureVector> centroids;  // standardized space
    FeatureVector feature_means{};
    FeatureVector feature_sds{};
    uint64_t seed = 0;
};

struct KmeansOptions {
    int k_min = 10;
    int k_max = 16;
    int max_iters = 100;
    double rel_tol = 1e-4;  // stop when relative inertia change drops below
};

ClusterModel fit_kmeans_auto(const std::vector<FeatureSample>& samples, const KmeansOptions& opts,
                             uint64_t seed, int cell_id = 0);

// Index of the nearest centroid in standardized space; equidistant
// centroids resolve to the lowest cluster id.
int predict_point(const ClusterModel& model, const FeatureVector& feat);

// Whole-map cluster assignment; invalid pixels get nodata (65535).
RasterBand predict_map(const ClusterModel& model, const FeatureStack& stack, int tile = 256,
                       int workers = 1);

// Per-sample assignments and inertia, for labeling exports and tests.
std::vector<int> assign_samples(const ClusterModel& model, const std::vector<FeatureSample>& samples);

void save_model(const std::string& path, const ClusterModel& model);
ClusterModel load_model(const std::string& path);

}  // namespace palmmap
