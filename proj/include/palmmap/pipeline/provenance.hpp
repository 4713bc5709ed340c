#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace palmmap {

inline constexpr const char* kToolVersion = "0.1.0";

// CRC32 of a file's bytes, for provenance sidecars.
uint32_t file_crc32(const std::string& path);

// Writes <artifact>.prov.json recording the stage, parameters, input
// checksums, seed and tool version. A run is reconstructible from the
// config, the manifest and these sidecars.
void write_provenance(const std::string& artifact_path, const std::string& stage,
                      const nlohmann::json& parameters, const std::vector<std::string>& inputs,
                      uint64_t seed);

}  // namespace palmmap
