#include "palmmap/validate/sampling.hpp"

#include "palmmap/util/rng.hpp"

namespace palmmap {

namespace {

// Partial Fisher-Yates draw of `take` indices from the frame, in draw order.
std::vector<std::pair<int, int>> draw(std::vector<uint32_t>& frame, size_t take, int width,
                                      std::mt19937_64& eng) {
    take = std::min(take, frame.size());
    std::vector<std::pair<int, int>> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        size_t j = i + static_cast<size_t>(uniform_index(eng, frame.size() - i));
        std::swap(frame[i], frame[j]);
        out.emplace_back(static_cast<int>(frame[i] / width), static_cast<int>(frame[i] % width));
    }
    return out;
}

}  // namespace

std::vector<StratumSample> stratified_sample(const GridGeometry& grid, const RasterBand& extent,
                                             const RasterBand* region_mask, int region_id,
                                             size_t n_total, Allocation allocation,
                                             uint64_t seed) {
    if (extent.values.size() != grid.size())
        throw std::invalid_argument("stratified_sample: extent shape mismatch");
    if (region_mask && region_mask->values.size() != extent.values.size())
        throw std::invalid_argument("stratified_sample: grids not aligned");

    std::vector<uint32_t> palm_frame, other_frame;
    for (size_t i = 0; i < extent.values.size(); ++i) {
        if (region_mask && region_mask->values[i] != 1.0f) continue;
        float v = extent.values[i];
        if (extent.is_nodata(v)) continue;
        (v == 1.0f ? palm_frame : other_frame).push_back(static_cast<uint32_t>(i));
    }
    if (palm_frame.empty() || other_frame.empty())
        throw std::runtime_error("stratified_sample: a stratum is empty");

    const double w_palm = static_cast<double>(palm_frame.size()) /
                          static_cast<double>(palm_frame.size() + other_frame.size());
    size_t n_palm;
    if (allocation == Allocation::EQUAL) {
        n_palm = n_total / 2;
    } else {
        n_palm = static_cast<size_t>(std::llround(static_cast<double>(n_total) * w_palm));
    }
    size_t n_other = n_total - std::min(n_palm, n_total);

    auto eng_palm = make_engine(seed, 0xA11);
    auto eng_other = make_engine(seed, 0xB22);

    StratumSample palm;
    palm.stratum = Stratum::MAPPED_PALM;
    palm.region_id = region_id;
    palm.weight = w_palm;
    palm.locations = draw(palm_frame, n_palm, grid.width, eng_palm);

    StratumSample other;
    other.stratum = Stratum::MAPPED_OTHER;
    other.region_id = region_id;
    other.weight = 1.0 - w_palm;
    other.locations = draw(other_frame, n_other, grid.width, eng_other);

    return {palm, other};
}

RefLabel aggregate_votes(const Interpretation& interp) {
    if (interp.votes.empty()) throw std::invalid_argument("interpretation has no votes");
    int64_t palm = 0, not_palm = 0;
    for (Vote v : interp.votes) {
        if (v == Vote::PALM) ++palm;
        else if (v == Vote::NOT_PALM) ++not_palm;
    }
    if (palm > not_palm) return RefLabel::PALM;
    if (not_palm > palm) return RefLabel::NOT_PALM;
    return RefLabel::UNDECIDED;
}

}  // namespace palmmap
