#pragma once

#include <vector>

#include "palmmap/raster/grid.hpp"
#include "palmmap/util/parallel.hpp"

namespace palmmap {

// A core window plus a read halo for kernels that look sideways. Core
// windows partition the grid; read windows may overlap.
struct TileWindow {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;
    int halo = 0;

    // Read region: core expanded by halo, clipped to the grid.
    int rx0(const GridGeometry& g) const { return std::max(0, x0 - halo); }
    int ry0(const GridGeometry& g) const { return std::max(0, y0 - halo); }
    int rx1(const GridGeometry& g) const { return std::min(g.width, x0 + w + halo); }
    int ry1(const GridGeometry& g) const { return std::min(g.height, y0 + h + halo); }

    bool operator==(const TileWindow&) const = default;
};

// Row-major tiling; core windows cover every pixel exactly once.
std::vector<TileWindow> iter_tiles(const GridGeometry& grid, int tile, int halo);

// Convenience: run fn over tiles on `workers` threads. Tiles must write
// disjoint output regions.
template <typename Fn>
void for_each_tile(const GridGeometry& grid, int tile, int halo, int workers, Fn&& fn) {
    auto tiles = iter_tiles(grid, tile, halo);
    parallel_for(tiles.size(), workers, [&](size_t i) { fn(tiles[i]); });
}

}  // namespace palmmap
