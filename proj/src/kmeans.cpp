#include "palmmap/classify/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"
#include "palmmap/raster/tiling.hpp"
#include "palmmap/util/rng.hpp"

namespace palmmap {

namespace {

using Point = FeatureVector;

double dist2(const Point& a, const Point& b) {
    double d = 0.0;
    for (int f = 0; f < kNumFeatures; ++f) {
        double t = static_cast<double>(a[f]) - b[f];
        d += t * t;
    }
    return d;
}

struct KmeansRun {
    std::vector<Point> centroids;
    std::vector<int> assign;
    double inertia = 0.0;
};

// Seeded k-means++ initialization.
std::vector<Point> init_plus_plus(const std::vector<Point>& pts, int k, std::mt19937_64& eng) {
    std::vector<Point> centroids;
    centroids.reserve(k);
    centroids.push_back(pts[uniform_index(eng, pts.size())]);
    std::vector<double> d2(pts.size());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& ctr : centroids) best = std::min(best, dist2(pts[i], ctr));
            d2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            double target = uniform_unit(eng) * total;
            double acc = 0.0;
            for (size_t i = 0; i < pts.size(); ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = uniform_index(eng, pts.size());
        }
        centroids.push_back(pts[pick]);
    }
    return centroids;
}

KmeansRun lloyd(const std::vector<Point>& pts, int k, const KmeansOptions& opts,
                std::mt19937_64& eng) {
    KmeansRun run;
    run.centroids = init_plus_plus(pts, k, eng);
    run.assign.assign(pts.size(), 0);

    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        double inertia = 0.0;
        for (size_t i = 0; i < pts.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            int bi = 0;
            for (int c = 0; c < k; ++c) {
                double d = dist2(pts[i], run.centroids[c]);
                if (d < best) {  // strict: ties keep the lower cluster id
                    best = d;
                    bi = c;
                }
            }
            run.assign[i] = bi;
            inertia += best;
        }

        std::vector<std::array<double, kNumFeatures>> sums(k);
        std::vector<size_t> counts(k, 0);
        for (auto& s : sums) s.fill(0.0);
        for (size_t i = 0; i < pts.size(); ++i) {
            int c = run.assign[i];
            ++counts[c];
            for (int f = 0; f < kNumFeatures; ++f) sums[c][f] += pts[i][f];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reseed an empty cluster at the point farthest from its centroid.
                size_t far_i = 0;
                double far_d = -1.0;
                for (size_t i = 0; i < pts.size(); ++i) {
                    double d = dist2(pts[i], run.centroids[run.assign[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far_i = i;
                    }
                }
                run.centroids[c] = pts[far_i];
                continue;
            }
            for (int f = 0; f < kNumFeatures; ++f)
                run.centroids[c][f] = static_cast<float>(sums[c][f] / counts[c]);
        }

        run.inertia = inertia;
        if (prev_inertia < std::numeric_limits<double>::max()) {
            double rel = prev_inertia > 0.0 ? (prev_inertia - inertia) / prev_inertia : 0.0;
            if (rel >= 0.0 && rel < opts.rel_tol) break;
        }
        prev_inertia = inertia;
    }

    // Final assignment against the last centroid update.
    run.inertia = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::max();
        int bi = 0;
        for (int c = 0; c < k; ++c) {
            double d = dist2(pts[i], run.centroids[c]);
            if (d < best) {
                best = d;
                bi = c;
            }
        }
        run.assign[i] = bi;
        run.inertia += best;
    }
    return run;
}

double calinski_harabasz(const std::vector<Point>& pts, const KmeansRun& run, int k) {
    const size_t n = pts.size();
    if (k <= 1 || n <= static_cast<size_t>(k)) return 0.0;
    Point mean{};
    std::array<double, kNumFeatures> acc{};
    for (const auto& p : pts)
        for (int f = 0; f < kNumFeatures; ++f) acc[f] += p[f];
    for (int f = 0; f < kNumFeatures; ++f) mean[f] = static_cast<float>(acc[f] / n);

    std::vector<size_t> counts(k, 0);
    for (int a : run.assign) ++counts[a];
    double between = 0.0;
    for (int c = 0; c < k; ++c) between += counts[c] * dist2(run.centroids[c], mean);
    double within = run.inertia;
    if (within <= 0.0) return std::numeric_limits<double>::max();
    return (between / (k - 1)) / (within / (n - k));
}

}  // namespace

ClusterModel fit_kmeans_auto(const std::vector<FeatureSample>& samples, const KmeansOptions& opts,
                             uint64_t seed, int cell_id) {
    if (opts.k_min < 2 || opts.k_max < opts.k_min)
        throw std::invalid_argument("bad k range");

    std::set<std::array<float, kNumFeatures>> distinct;
    for (const auto& s : samples) {
        distinct.insert(s.features);
        if (distinct.size() > static_cast<size_t>(opts.k_max)) break;
    }
    if (distinct.size() < static_cast<size_t>(opts.k_min))
        throw std::runtime_error("cell " + std::to_string(cell_id) + ": fewer than " +
                                 std::to_string(opts.k_min) + " distinct feature vectors");
    const int k_hi = static_cast<int>(std::min<size_t>(opts.k_max, distinct.size()));

    // Standardize (z-score) per feature.
    ClusterModel model;
    model.cell_id = cell_id;
    model.seed = seed;
    const size_t n = samples.size();
    for (int f = 0; f < kNumFeatures; ++f) {
        double sum = 0.0;
        for (const auto& s : samples) sum += s.features[f];
        double mean = sum / static_cast<double>(n);
        double var = 0.0;
        for (const auto& s : samples) {
            double d = s.features[f] - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / static_cast<double>(n));
        model.feature_means[f] = static_cast<float>(mean);
        model.feature_sds[f] = static_cast<float>(sd > 0.0 ? sd : 1.0);
    }

    std::vector<Point> pts(n);
    for (size_t i = 0; i < n; ++i)
        for (int f = 0; f < kNumFeatures; ++f)
            pts[i][f] = (samples[i].features[f] - model.feature_means[f]) / model.feature_sds[f];

    double best_score = -1.0;
    int best_k = 0;
    KmeansRun best_run;
    for (int k = opts.k_min; k <= k_hi; ++k) {
        auto eng = make_engine(seed, (static_cast<uint64_t>(cell_id) << 8) | static_cast<uint64_t>(k));
        KmeansRun run = lloyd(pts, k, opts, eng);
        double score = calinski_harabasz(pts, run, k);
        if (score > best_score) {  // strict: ties keep the smaller k
            best_score = score;
            best_k = k;
            best_run = std::move(run);
        }
    }

    model.k = best_k;
    model.centroids = std::move(best_run.centroids);
    return model;
}

int predict_point(const ClusterModel& model, const FeatureVector& feat) {
    Point p;
    for (int f = 0; f < kNumFeatures; ++f)
        p[f] = (feat[f] - model.feature_means[f]) / model.feature_sds[f];
    double best = std::numeric_limits<double>::max();
    int bi = 0;
    for (int c = 0; c < model.k; ++c) {
        double d = dist2(p, model.centroids[c]);
        if (d < best) {
            best = d;
            bi = c;
        }
    }
    return bi;
}

RasterBand predict_map(const ClusterModel& model, const FeatureStack& stack, int tile, int workers) {
    RasterBand out;
    out.name = "cluster";
    out.unit = Unit::ClassId;
    out.nodata = 65535.0f;
    out.values.assign(stack.grid.size(), 65535.0f);
    for_each_tile(stack.grid, tile, 0, workers, [&](const TileWindow& t) {
        FeatureVector feat;
        for (int r = t.y0; r < t.y0 + t.h; ++r) {
            for (int c = t.x0; c < t.x0 + t.w; ++c) {
                size_t i = static_cast<size_t>(r) * stack.grid.width + c;
                if (!stack.get(i, feat)) continue;
                out.values[i] = static_cast<float>(predict_point(model, feat));
            }
        }
    });
    return out;
}

std::vector<int> assign_samples(const ClusterModel& model, const std::vector<FeatureSample>& samples) {
    std::vector<int> out(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) out[i] = predict_point(model, samples[i].features);
    return out;
}

void save_model(const std::string& path, const ClusterModel& model) {
    nlohmann::json j;
    j["cell_id"] = model.cell_id;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["feature_names"] = kFeatureNames;
    j["feature_means"] = model.feature_means;
    j["feature_sds"] = model.feature_sds;
    nlohmann::json cents = nlohmann::json::array();
    for (const auto& c : model.centroids) cents.push_back(c);
    j["centroids"] = cents;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model '" + path + "'");
    out << j.dump(2) << "\n";
}

ClusterModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    ClusterModel m;
    m.cell_id = j.at("cell_id");
    m.k = j.at("k");
    m.seed = j.at("seed");
    for (int f = 0; f < kNumFeatures; ++f) {
        m.feature_means[f] = j.at("feature_means")[f];
        m.feature_sds[f] = j.at("feature_sds")[f];
    }
    for (const auto& c : j.at("centroids")) {
        FeatureVector v;
        for (int f = 0; f < kNumFeatures; ++f) v[f] = c[f];
        m.centroids.push_back(v);
    }
    if (static_cast<int>(m.centroids.size()) != m.k)
        throw std::runtime_error("model '" + path + "': centroid count != k");
    return m;
}

}  // namespace palmmap
