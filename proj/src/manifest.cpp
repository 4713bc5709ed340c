#include "palmmap/raster/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace palmmap {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sensor_name(Sensor s) {
    switch (s) {
        case Sensor::S1: return "S1";
        case Sensor::S2: return "S2";
        case Sensor::L5: return "L5";
        case Sensor::L7: return "L7";
        case Sensor::DEM: return "DEM";
        case Sensor::MASK: return "MASK";
        case Sensor::LOSSYEAR: return "LOSSYEAR";
    }
    throw std::logic_error("unhandled sensor");
}

Sensor sensor_from_name(const std::string& s) {
    if (s == "S1") return Sensor::S1;
    if (s == "S2") return Sensor::S2;
    if (s == "L5") return Sensor::L5;
    if (s == "L7") return Sensor::L7;
    if (s == "DEM") return Sensor::DEM;
    if (s == "MASK") return Sensor::MASK;
    if (s == "LOSSYEAR") return Sensor::LOSSYEAR;
    throw std::invalid_argument("unknown sensor '" + s + "'");
}

std::string orbit_name(Orbit o) {
    switch (o) {
        case Orbit::ASC: return "ASC";
        case Orbit::DESC: return "DESC";
        case Orbit::NA: return "NA";
    }
    throw std::logic_error("unhandled orbit");
}

Orbit orbit_from_name(const std::string& s) {
    if (s == "ASC") return Orbit::ASC;
    if (s == "DESC") return Orbit::DESC;
    if (s == "NA") return Orbit::NA;
    throw std::invalid_argument("unknown orbit '" + s + "'");
}

SceneManifest load_manifest(const std::string& path) {
    if (!fs::exists(path)) throw std::runtime_error("manifest not found: '" + path + "'");
    std::ifstream in(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest '" + path + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array())
        throw std::runtime_error("manifest '" + path + "': missing \"entries\" array");

    const fs::path base = fs::absolute(path).parent_path();
    SceneManifest m;
    int idx = 0;
    for (const auto& e : doc["entries"]) {
        auto fail = [&](const std::string& msg) {
            throw std::runtime_error("manifest '" + path + "' entry " + std::to_string(idx) + ": " + msg);
        };
        if (!e.is_object()) fail("not an object");
        SceneEntry s;
        s.ordinal = idx;
        try {
            s.sensor = sensor_from_name(e.at("sensor").get<std::string>());
            s.date = parse_iso_date(e.at("date").get<std::string>());
            s.orbit = e.contains("orbit") ? orbit_from_name(e.at("orbit").get<std::string>()) : Orbit::NA;
            fs::path p = e.at("path").get<std::string>();
            s.path = (p.is_absolute() ? p : base / p).lexically_normal().string();
            if (e.contains("bands"))
                for (const auto& b : e.at("bands")) s.bands.push_back(b.get<std::string>());
            if (e.contains("qa_band") && !e.at("qa_band").is_null())
                s.qa_band = e.at("qa_band").get<std::string>();
            if (e.contains("incidence_band") && !e.at("incidence_band").is_null())
                s.incidence_band = e.at("incidence_band").get<std::string>();
        } catch (const json::exception& ex) {
            fail(ex.what());
        } catch (const std::invalid_argument& ex) {
            fail(ex.what());
        }
        if (s.sensor == Sensor::S1 && s.orbit == Orbit::NA)
            fail("S1 scenes must declare orbit ASC or DESC");
        if (!fs::exists(s.path)) fail("scene file does not exist: '" + s.path + "'");
        m.entries.push_back(std::move(s));
        ++idx;
    }
    std::stable_sort(m.entries.begin(), m.entries.end(), [](const SceneEntry& a, const SceneEntry& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.ordinal < b.ordinal;
    });
    return m;
}

void save_manifest(const std::string& path, const SceneManifest& manifest) {
    json entries = json::array();
    const fs::path base = fs::absolute(path).parent_path();
    for (const auto& e : manifest.entries) {
        json o;
        fs::path p(e.path);
        o["path"] = p.lexically_proximate(base).string();
        o["sensor"] = sensor_name(e.sensor);
        o["date"] = format_iso_date(e.date);
        o["orbit"] = orbit_name(e.orbit);
        o["bands"] = e.bands;
        if (e.qa_band) o["qa_band"] = *e.qa_band;
        if (e.incidence_band) o["incidence_band"] = *e.incidence_band;
        entries.push_back(o);
    }
    json doc;
    doc["entries"] = entries;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << doc.dump(2) << "\n";
}

}  // namespace palmmap
