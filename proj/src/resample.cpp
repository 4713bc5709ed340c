#include "palmmap/raster/resample.hpp"

namespace palmmap {

RasterBand resample_nearest(const GridGeometry& src_grid, const RasterBand& src,
                            const GridGeometry& dst_grid) {
    if (src_grid.epsg != dst_grid.epsg)
        throw std::invalid_argument("resample_nearest: CRS mismatch (" + std::to_string(src_grid.epsg) +
                                    " vs " + std::to_string(dst_grid.epsg) + "); reprojection is out of scope");
    if (src.values.size() != src_grid.size())
        throw std::invalid_argument("resample_nearest: band shape mismatch");

    RasterBand out;
    out.name = src.name;
    out.unit = src.unit;
    float nodata = src.nodata ? *src.nodata : std::nanf("");
    out.nodata = src.nodata;
    out.values.assign(dst_grid.size(), nodata);

    for (int r = 0; r < dst_grid.height; ++r) {
        double cy = dst_grid.center_y(r);
        int sr = src_grid.row_of(cy);
        if (sr < 0 || sr >= src_grid.height) continue;
        for (int c = 0; c < dst_grid.width; ++c) {
            double cx = dst_grid.center_x(c);
            int sc = src_grid.col_of(cx);
            if (sc < 0 || sc >= src_grid.width) continue;
            out.values[static_cast<size_t>(r) * dst_grid.width + c] =
                src.values[static_cast<size_t>(sr) * src_grid.width + sc];
        }
    }
    return out;
}

}  // namespace palmmap
