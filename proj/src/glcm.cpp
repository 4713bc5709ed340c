#include "palmmap/texture/glcm.hpp"

#include <cmath>

#include "palmmap/raster/tiling.hpp"

namespace palmmap {

namespace {
constexpr float kSavgNodata = -9999.0f;
}

RasterBand quantize(const RasterBand& byte_band, int levels) {
    if (levels < 2 || levels > 256) throw std::invalid_argument("levels must be in [2,256]");
    RasterBand out;
    out.name = byte_band.name;
    out.unit = Unit::Byte;
    out.values.resize(byte_band.values.size());
    for (size_t i = 0; i < byte_band.values.size(); ++i) {
        int v = static_cast<int>(byte_band.values[i]);
        out.values[i] = static_cast<float>((v * levels) / 256);
    }
    return out;
}

SumDistribution sum_distribution(const std::vector<int>& window, int w, int h, int levels,
                                 const std::vector<std::pair<int, int>>& offsets, bool symmetric) {
    if (static_cast<size_t>(w) * h != window.size())
        throw std::invalid_argument("window shape mismatch");
    SumDistribution dist;
    dist.p_sum.assign(2 * levels - 1, 0.0);
    double total = 0.0;
    for (auto [dy, dx] : offsets) {
        for (int r = 0; r < h; ++r) {
            int r2 = r + dy;
            if (r2 < 0 || r2 >= h) continue;
            for (int c = 0; c < w; ++c) {
                int c2 = c + dx;
                if (c2 < 0 || c2 >= w) continue;
                int a = window[static_cast<size_t>(r) * w + c];
                int b = window[static_cast<size_t>(r2) * w + c2];
                if (a < 0 || b < 0) continue;
                double inc = symmetric ? 2.0 : 1.0;  // (a,b) and (b,a) share the sum a+b
                dist.p_sum[a + b] += inc;
                total += inc;
            }
        }
    }
    if (total > 0.0)
        for (double& p : dist.p_sum) p /= total;
    return dist;
}

double savg(const SumDistribution& dist) {
    double sum = 0.0, mass = 0.0;
    for (size_t s = 0; s < dist.p_sum.size(); ++s) {
        sum += static_cast<double>(s) * dist.p_sum[s];
        mass += dist.p_sum[s];
    }
    if (mass <= 0.0) return std::nan("");
    return sum;
}

RasterBand savg_map(const GridGeometry& grid, const RasterBand& byte_band,
                    const RasterBand* valid_mask, const GlcmParams& params, int tile,
                    int workers) {
    params.check();
    if (byte_band.values.size() != grid.size())
        throw std::invalid_argument("savg_map: band shape mismatch");

    // Quantize once; -1 marks invalid pixels.
    const int W = grid.width, H = grid.height;
    std::vector<int> level(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        bool ok = !byte_band.is_nodata(byte_band.values[i]);
        if (ok && valid_mask) ok = valid_mask->values[i] == 1.0f;
        level[i] = ok ? (static_cast<int>(byte_band.values[i]) * params.levels) / 256 : -1;
    }

    RasterBand out;
    out.name = "savg_" + byte_band.name;
    out.unit = Unit::Index;
    out.nodata = kSavgNodata;
    out.values.assign(grid.size(), kSavgNodata);

    const int R = params.radius;
    for_each_tile(grid, tile, R, workers, [&](const TileWindow& t) {
        for (int r = t.y0; r < t.y0 + t.h; ++r) {
            for (int c = t.x0; c < t.x0 + t.w; ++c) {
                const size_t idx = static_cast<size_t>(r) * W + c;
                if (level[idx] < 0) continue;
                const int wy0 = std::max(0, r - R), wy1 = std::min(H - 1, r + R);
                const int wx0 = std::max(0, c - R), wx1 = std::min(W - 1, c + R);
                double acc = 0.0;
                int n_offsets = 0;
                for (auto [dy, dx] : params.offsets) {
                    int64_t sum = 0;
                    int64_t count = 0;
                    for (int y = wy0; y <= wy1; ++y) {
                        int y2 = y + dy;
                        if (y2 < wy0 || y2 > wy1) continue;
                        const int* row_a = level.data() + static_cast<size_t>(y) * W;
                        const int* row_b = level.data() + static_cast<size_t>(y2) * W;
                        for (int x = wx0; x <= wx1; ++x) {
                            int x2 = x + dx;
                            if (x2 < wx0 || x2 > wx1) continue;
                            int a = row_a[x];
                            int b = row_b[x2];
                            if (a < 0 || b < 0) continue;
                            sum += a + b;
                            ++count;
                        }
                    }
                    if (count > 0) {
                        // Mean of s = a+b over pairs; the symmetric double
                        // count cancels in the normalized distribution.
                        acc += static_cast<double>(sum) / static_cast<double>(count);
                        ++n_offsets;
                    }
                }
                if (n_offsets > 0) out.values[idx] = static_cast<float>(acc / n_offsets);
            }
        }
    });
    return out;
}

}  // namespace palmmap
