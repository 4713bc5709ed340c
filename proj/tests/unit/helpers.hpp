#pragma once

// Shared fixtures and independent brute-force oracles. The oracles
// deliberately use different algorithmic routes from the library kernels
// they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "palmmap/optical/series.hpp"
#include "palmmap/raster/grid.hpp"
#include "palmmap/texture/glcm.hpp"
#include "palmmap/util/date.hpp"

namespace testutil {

// Fresh scratch directory under the working dir, wiped on construction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::current_path() / "test_tmp" / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& rel) const { return (path / rel).string(); }
};

inline palmmap::GridGeometry small_grid(int w, int h, double px = 30.0, int epsg = 32648) {
    palmmap::GridGeometry g;
    g.epsg = epsg;
    g.origin_x = 500000.0;
    g.origin_y = 200000.0;
    g.px_size_x = px;
    g.px_size_y = -px;
    g.width = w;
    g.height = h;
    return g;
}

inline std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---- oracles ----

// Trimmed mean by repeated minimum removal (library sorts instead).
inline double oracle_trimmed_mean(std::vector<float> v, double f) {
    if (v.empty()) return std::nan("");
    size_t drop = static_cast<size_t>(std::floor(f * static_cast<double>(v.size())));
    for (size_t d = 0; d < drop; ++d) v.erase(std::min_element(v.begin(), v.end()));
    double s = 0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Nearest-rank percentile by full sort (library uses nth_element).
inline double oracle_percentile(std::vector<float> v, double p) {
    std::sort(v.begin(), v.end());
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    if (rank < 1) rank = 1;
    if (rank > v.size()) rank = v.size();
    return v[rank - 1];
}

// Per-pixel SAVG by explicit p_{x+y} histograms per offset, averaged over
// offsets with pairs (library accumulates running sums instead).
inline std::vector<double> oracle_savg_map(const std::vector<int>& levels, int W, int H,
                                           int n_levels, int radius,
                                           const std::vector<std::pair<int, int>>& offsets) {
    std::vector<double> out(static_cast<size_t>(W) * H, std::nan(""));
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            if (levels[static_cast<size_t>(r) * W + c] < 0) continue;
            int y0 = std::max(0, r - radius), y1 = std::min(H - 1, r + radius);
            int x0 = std::max(0, c - radius), x1 = std::min(W - 1, c + radius);
            double savg_sum = 0.0;
            int n_off = 0;
            for (auto [dy, dx] : offsets) {
                std::vector<double> hist(2 * n_levels - 1, 0.0);
                double total = 0.0;
                for (int y = y0; y <= y1; ++y) {
                    for (int x = x0; x <= x1; ++x) {
                        int y2 = y + dy, x2 = x + dx;
                        if (y2 < y0 || y2 > y1 || x2 < x0 || x2 > x1) continue;
                        int a = levels[static_cast<size_t>(y) * W + x];
                        int b = levels[static_cast<size_t>(y2) * W + x2];
                        if (a < 0 || b < 0) continue;
                        hist[a + b] += 2.0;  // symmetric pair counted both ways
                        total += 2.0;
                    }
                }
                if (total == 0.0) continue;
                double savg = 0.0;
                for (size_t s = 0; s < hist.size(); ++s) savg += static_cast<double>(s) * hist[s] / total;
                savg_sum += savg;
                ++n_off;
            }
            if (n_off > 0) out[static_cast<size_t>(r) * W + c] = savg_sum / n_off;
        }
    }
    return out;
}

// Rolling monthly median by direct date arithmetic and full sorts.
inline palmmap::MonthlySeries oracle_rolling_median(const palmmap::IndexSeries& series,
                                                    int window_days, int min_obs) {
    using namespace palmmap;
    MonthlySeries out;
    if (series.samples.empty()) return out;
    int half = (window_days + 1) / 2;
    Date first = series.samples.front().date;
    Date last = series.samples.back().date;
    for (int m = month_index(first.year, first.month); m <= month_index(last.year, last.month);
         ++m) {
        int year = m / 12, month = m % 12 + 1;
        int64_t mid = days_from_civil(year, month, 15);
        std::vector<float> vals;
        for (const auto& s : series.samples) {
            if (!s.valid) continue;
            int64_t d = to_days(s.date);
            if (d >= mid - half && d <= mid + half) vals.push_back(s.value);
        }
        if (static_cast<int>(vals.size()) < min_obs) continue;
        std::sort(vals.begin(), vals.end());
        double med = vals.size() % 2 == 1
                         ? vals[vals.size() / 2]
                         : 0.5 * (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]);
        out.months.push_back({year, month, static_cast<float>(med), static_cast<int>(vals.size())});
    }
    return out;
}

// Horn slope by direct formula per pixel (edge replication).
inline std::vector<double> oracle_horn_slope(const std::vector<float>& dem, int W, int H,
                                             double dx_m, double dy_m) {
    std::vector<double> out(dem.size());
    auto z = [&](int r, int c) {
        r = std::clamp(r, 0, H - 1);
        c = std::clamp(c, 0, W - 1);
        return static_cast<double>(dem[static_cast<size_t>(r) * W + c]);
    };
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            double gx = (z(r - 1, c + 1) + 2 * z(r, c + 1) + z(r + 1, c + 1) -
                         z(r - 1, c - 1) - 2 * z(r, c - 1) - z(r + 1, c - 1)) / (8 * dx_m);
            double gy = (z(r + 1, c - 1) + 2 * z(r + 1, c) + z(r + 1, c + 1) -
                         z(r - 1, c - 1) - 2 * z(r - 1, c) - z(r - 1, c + 1)) / (8 * dy_m);
            out[static_cast<size_t>(r) * W + c] =
                std::atan(std::hypot(gx, gy)) * 180.0 / M_PI;
        }
    }
    return out;
}

}  // namespace testutil
