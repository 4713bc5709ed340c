#pragma once

#include <map>
#include <string>
#include <vector>

#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Human-supplied cluster -> {oilpalm, other} mapping, one row per
// (cell_id, cluster_id). CSV format: cell_id,cluster_id,class
struct LabelTable {
    std::map<std::pair<int, int>, bool> oilpalm;  // (cell_id, cluster_id) -> is oil palm

    bool lookup(int cell_id, int cluster_id) const;
};

LabelTable load_label_table(const std::string& path);
void save_label_table(const std::string& path, const LabelTable& table);

// Binary oil-palm map from a cluster map: 1 where the pixel's cluster is
// labeled oilpalm. Unlabeled clusters are an error naming the pair.
RasterBand apply_labels(const RasterBand& class_map, const LabelTable& labels, int cell_id);

// 1 where at least `threshold` of the maps valid at the pixel vote 1;
// pixels valid in fewer than `threshold` maps become nodata (255).
RasterBand majority_vote(const std::vector<RasterBand>& binary_maps, int threshold);

}  // namespace palmmap
