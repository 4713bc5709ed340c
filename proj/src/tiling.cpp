#include "palmmap/raster/tiling.hpp"

namespace palmmap {

std::vector<TileWindow> iter_tiles(const GridGeometry& grid, int tile, int halo) {
    grid.check();
    if (tile < 1) throw std::invalid_argument("tile size must be >= 1");
    if (halo < 0) throw std::invalid_argument("halo must be >= 0");

    std::vector<TileWindow> out;
    out.reserve(static_cast<size_t>((grid.width + tile - 1) / tile) *
                ((grid.height + tile - 1) / tile));
    for (int y0 = 0; y0 < grid.height; y0 += tile) {
        for (int x0 = 0; x0 < grid.width; x0 += tile) {
            TileWindow w;
            w.x0 = x0;
            w.y0 = y0;
            w.w = std::min(tile, grid.width - x0);
            w.h = std::min(tile, grid.height - y0);
            w.halo = halo;
            out.push_back(w);
        }
    }
    return out;
}

}  // namespace palmmap
