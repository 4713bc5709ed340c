#pragma once

#include <optional>
#include <string>
#include <vector>

#include "palmmap/util/date.hpp"

namespace palmmap {

enum class Sensor { S1, S2, L5, L7, DEM, MASK, LOSSYEAR };
enum class Orbit { ASC, DESC, NA };

std::string sensor_name(Sensor s);
Sensor sensor_from_name(const std::string& s);
std::string orbit_name(Orbit o);
Orbit orbit_from_name(const std::string& s);

inline bool is_optical(Sensor s) { return s == Sensor::S2 || s == Sensor::L5 || s == Sensor::L7; }

struct SceneEntry {
    std::string path;  // absolute, resolved against the manifest directory
    Sensor sensor = Sensor::S1;
    Date date;
    Orbit orbit = Orbit::NA;
    std::vector<std::string> bands;
    std::optional<std::string> qa_band;
    std::optional<std::string> incidence_band;
    int ordinal = 0;  // position in the manifest file; tie-break for equal dates
};

struct SceneManifest {
    std::vector<SceneEntry> entries;  // sorted by (date, ordinal)
};

// Parses and validates the manifest JSON ({"entries":[...]}). Relative scene
// paths are resolved against the manifest's directory. Errors name the
// offending entry index.
SceneManifest load_manifest(const std::string& path);

void save_manifest(const std::string& path, const SceneManifest& manifest);

}  // namespace palmmap
