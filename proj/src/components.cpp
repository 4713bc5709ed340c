#include "palmmap/postproc/components.hpp"

#include <numeric>

namespace palmmap {

namespace {

// Union-find with path halving.
int find_root(std::vector<int32_t>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

void unite(std::vector<int32_t>& parent, int a, int b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

}  // namespace

std::pair<std::vector<int32_t>, int> label_components(const RasterBand& mask, int width,
                                                      int height) {
    if (mask.values.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("label_components: shape mismatch");

    std::vector<int32_t> labels(mask.values.size(), 0);
    std::vector<int32_t> parent(1, 0);  // parent[0] unused (background)
    int next = 1;

    // First pass: provisional labels, merging across the four causal
    // 8-neighbors (W, NW, N, NE).
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            size_t i = static_cast<size_t>(r) * width + c;
            if (mask.values[i] != 1.0f) continue;
            int neigh[4] = {0, 0, 0, 0};
            int nn = 0;
            if (c > 0 && labels[i - 1]) neigh[nn++] = labels[i - 1];
            if (r > 0) {
                size_t up = i - width;
                if (c > 0 && labels[up - 1]) neigh[nn++] = labels[up - 1];
                if (labels[up]) neigh[nn++] = labels[up];
                if (c + 1 < width && labels[up + 1]) neigh[nn++] = labels[up + 1];
            }
            if (nn == 0) {
                labels[i] = next;
                parent.push_back(next);
                ++next;
            } else {
                int m = neigh[0];
                for (int k = 1; k < nn; ++k) m = std::min(m, neigh[k]);
                labels[i] = m;
                for (int k = 0; k < nn; ++k) unite(parent, m, neigh[k]);
            }
        }
    }

    // Second pass: compress to dense labels.
    std::vector<int32_t> dense(parent.size(), 0);
    int count = 0;
    for (int p = 1; p < next; ++p) {
        int root = find_root(parent, p);
        if (root == p) dense[p] = ++count;
    }
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) labels[i] = dense[find_root(parent, labels[i])];
    return {std::move(labels), count};
}

RasterBand enforce_mmu(const RasterBand& mask, int width, int height, double pixel_area_m2,
                       double min_area_m2) {
    if (pixel_area_m2 <= 0.0) throw std::invalid_argument("enforce_mmu: pixel area must be positive");
    auto [labels, count] = label_components(mask, width, height);
    std::vector<int64_t> sizes(static_cast<size_t>(count) + 1, 0);
    for (int32_t l : labels)
        if (l) ++sizes[l];

    RasterBand out = mask;
    for (size_t i = 0; i < out.values.size(); ++i) {
        if (!labels[i]) continue;
        double area = static_cast<double>(sizes[labels[i]]) * pixel_area_m2;
        if (area < min_area_m2) out.values[i] = 0.0f;
    }
    return out;
}

}  // namespace palmmap
