#include "palmmap/postproc/filters.hpp"

#include <cmath>

namespace palmmap {

RasterBand ndvi_filter(const RasterBand& mask, const RasterBand& ndvi, double floor) {
    if (mask.values.size() != ndvi.values.size())
        throw std::invalid_argument("ndvi_filter: grids not aligned");
    RasterBand out = mask;
    for (size_t i = 0; i < out.values.size(); ++i) {
        if (out.values[i] != 1.0f) continue;
        float v = ndvi.values[i];
        if (ndvi.is_nodata(v) || v < floor) out.values[i] = 0.0f;
    }
    return out;
}

RasterBand union_mask(size_t n_pixels, const std::vector<const RasterBand*>& masks) {
    RasterBand out;
    out.name = "mask_union";
    out.unit = Unit::Flag;
    out.values.assign(n_pixels, 0.0f);
    for (const RasterBand* m : masks) {
        if (m->values.size() != n_pixels)
            throw std::invalid_argument("union_mask: grids not aligned");
        for (size_t i = 0; i < n_pixels; ++i)
            if (m->values[i] == 1.0f) out.values[i] = 1.0f;
    }
    return out;
}

RasterBand slope_deg(const RasterBand& dem, int width, int height, double dx_m, double dy_m) {
    if (dem.values.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("slope_deg: shape mismatch");
    if (dx_m <= 0.0 || dy_m <= 0.0)
        throw std::invalid_argument("slope_deg: pixel sizes must be positive meters");

    RasterBand out;
    out.name = "slope";
    out.unit = Unit::Degrees;
    out.nodata = -9999.0f;
    out.values.assign(dem.values.size(), -9999.0f);

    auto z = [&](int r, int c) -> float {
        r = std::clamp(r, 0, height - 1);
        c = std::clamp(c, 0, width - 1);
        return dem.values[static_cast<size_t>(r) * width + c];
    };

    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            float zs[3][3];
            bool ok = true;
            for (int i = 0; i < 3 && ok; ++i)
                for (int j = 0; j < 3; ++j) {
                    zs[i][j] = z(r + i - 1, c + j - 1);
                    if (dem.is_nodata(zs[i][j])) {
                        ok = false;
                        break;
                    }
                }
            if (!ok) continue;
            double dzdx = ((zs[0][2] + 2.0 * zs[1][2] + zs[2][2]) -
                           (zs[0][0] + 2.0 * zs[1][0] + zs[2][0])) / (8.0 * dx_m);
            double dzdy = ((zs[2][0] + 2.0 * zs[2][1] + zs[2][2]) -
                           (zs[0][0] + 2.0 * zs[0][1] + zs[0][2])) / (8.0 * dy_m);
            double slope = std::atan(std::sqrt(dzdx * dzdx + dzdy * dzdy)) * 180.0 / M_PI;
            out.values[static_cast<size_t>(r) * width + c] = static_cast<float>(slope);
        }
    }
    return out;
}

namespace {

RasterBand majority_fill_impl(const RasterBand& mask, int width, int height,
                              const std::vector<uint8_t>* changeable) {
    if (mask.values.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("majority_fill: shape mismatch");
    RasterBand out = mask;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            size_t i = static_cast<size_t>(r) * width + c;
            float center = mask.values[i];
            if (mask.is_nodata(center)) continue;
            if (changeable && !(*changeable)[i]) continue;
            int ones = 0, zeros = 0;
            for (int dr = -1; dr <= 1; ++dr) {
                int rr = r + dr;
                if (rr < 0 || rr >= height) continue;
                for (int dc = -1; dc <= 1; ++dc) {
                    int cc = c + dc;
                    if (cc < 0 || cc >= width) continue;
                    float v = mask.values[static_cast<size_t>(rr) * width + cc];
                    if (mask.is_nodata(v)) continue;
                    if (v == 1.0f) ++ones;
                    else ++zeros;
                }
            }
            if (ones > zeros) out.values[i] = 1.0f;
            else if (zeros > ones) out.values[i] = 0.0f;
            // tie: keep the input value
        }
    }
    return out;
}

}  // namespace

RasterBand majority_fill(const RasterBand& mask, int width, int height) {
    return majority_fill_impl(mask, width, height, nullptr);
}

RasterBand majority_fill_where(const RasterBand& mask, int width, int height,
                               const std::vector<uint8_t>& changeable) {
    return majority_fill_impl(mask, width, height, &changeable);
}

}  // namespace palmmap
