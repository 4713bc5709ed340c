#include "palmmap/classify/labels.hpp"

#include <fstream>
#include <sstream>

namespace palmmap {

bool LabelTable::lookup(int cell_id, int cluster_id) const {
    auto it = oilpalm.find({cell_id, cluster_id});
    if (it == oilpalm.end())
        throw std::runtime_error("no label for cell " + std::to_string(cell_id) + " cluster " +
                                 std::to_string(cluster_id));
    return it->second;
}

LabelTable load_label_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read label table '" + path + "'");
    LabelTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("cell_id", 0) == 0) continue;  // header
        std::stringstream ss(line);
        std::string cell, cluster, cls;
        if (!std::getline(ss, cell, ',') || !std::getline(ss, cluster, ',') ||
            !std::getline(ss, cls, ','))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected cell_id,cluster_id,class");
        while (!cls.empty() && (cls.back() == '\r' || cls.back() == ' ')) cls.pop_back();
        bool palm;
        if (cls == "oilpalm") palm = true;
        else if (cls == "other") palm = false;
        else throw std::runtime_error(path + ":" + std::to_string(lineno) + ": class must be oilpalm or other");
        auto key = std::make_pair(std::stoi(cell), std::stoi(cluster));
        if (table.oilpalm.count(key))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate label row");
        table.oilpalm[key] = palm;
    }
    return table;
}

void save_label_table(const std::string& path, const LabelTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write label table '" + path + "'");
    out << "cell_id,cluster_id,class\n";
    for (const auto& [key, palm] : table.oilpalm)
        out << key.first << "," << key.second << "," << (palm ? "oilpalm" : "other") << "\n";
}

RasterBand apply_labels(const RasterBand& class_map, const LabelTable& labels, int cell_id) {
    RasterBand out;
    out.name = "oilpalm";
    out.unit = Unit::Flag;
    out.nodata = 255.0f;
    out.values.assign(class_map.values.size(), 255.0f);
    for (size_t i = 0; i < class_map.values.size(); ++i) {
        float v = class_map.values[i];
        if (class_map.is_nodata(v)) continue;
        out.values[i] = labels.lookup(cell_id, static_cast<int>(v)) ? 1.0f : 0.0f;
    }
    return out;
}

RasterBand majority_vote(const std::vector<RasterBand>& binary_maps, int threshold) {
    if (binary_maps.empty()) throw std::invalid_argument("majority_vote: no maps");
    if (threshold < 1 || threshold > static_cast<int>(binary_maps.size()))
        throw std::invalid_argument("majority_vote: threshold must be in [1, map count]");
    const size_t n = binary_maps.front().values.size();
    for (const auto& m : binary_maps)
        if (m.values.size() != n) throw std::invalid_argument("majority_vote: map shapes differ");

    RasterBand out;
    out.name = "oilpalm_voted";
    out.unit = Unit::Flag;
    out.nodata = 255.0f;
    out.values.assign(n, 255.0f);
    for (size_t i = 0; i < n; ++i) {
        int n_valid = 0, votes = 0;
        for (const auto& m : binary_maps) {
            float v = m.values[i];
            if (m.is_nodata(v)) continue;
            ++n_valid;
            if (v == 1.0f) ++votes;
        }
        if (n_valid < threshold) continue;  // cannot reach the threshold: nodata
        out.values[i] = votes >= threshold ? 1.0f : 0.0f;
    }
    return out;
}

}  // namespace palmmap
