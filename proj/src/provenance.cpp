#include "palmmap/pipeline/provenance.hpp"

#include <zlib.h>

#include <fstream>
#include <stdexcept>

namespace palmmap {

uint32_t file_crc32(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot checksum '" + path + "'");
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0)
            crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(got));
    }
    return static_cast<uint32_t>(crc);
}

void write_provenance(const std::string& artifact_path, const std::string& stage,
                      const nlohmann::json& parameters, const std::vector<std::string>& inputs,
                      uint64_t seed) {
    nlohmann::json j;
    j["stage"] = stage;
    j["version"] = kToolVersion;
    j["seed"] = seed;
    j["parameters"] = parameters;
    nlohmann::json ins = nlohmann::json::array();
    for (const auto& p : inputs) {
        char crc[16];
        std::snprintf(crc, sizeof(crc), "%08x", file_crc32(p));
        ins.push_back({{"path", p}, {"crc32", crc}});
    }
    j["inputs"] = ins;
    std::ofstream out(artifact_path + ".prov.json");
    if (!out) throw std::runtime_error("cannot write provenance for '" + artifact_path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace palmmap
