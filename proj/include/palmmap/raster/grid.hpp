#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace palmmap {

// Physical interpretation of a band's values. Each unit has one fixed
// GeoTIFF sample type and a legal value domain enforced on read.
enum class Unit {
    Db,           // radar backscatter, dB
    Reflectance,  // surface reflectance, unitless
    Index,        // normalized-difference or texture index
    Byte,         // byte-scaled intensity
    ClassId,      // cluster / class identifier
    Year,         // calendar year (plus sentinels)
    Degrees,      // angle
    Flag,         // binary mask
    Meters,       // elevation
};

std::string unit_name(Unit u);
Unit unit_from_name(const std::string& name);

// Legal [lo,hi] domain for non-nodata values of a unit.
// The Index domain admits GLCM sum-average values (up to 2*255) alongside
// normalized-difference indices; series-level checks pin those to [-1,1].
inline std::pair<double, double> unit_domain(Unit u) {
    switch (u) {
        case Unit::Db: return {-60.0, 20.0};
        case Unit::Reflectance: return {0.0, 1.2};
        case Unit::Index: return {-1.0, 510.0};
        case Unit::Byte: return {0.0, 255.0};
        case Unit::ClassId: return {0.0, 65535.0};
        case Unit::Year: return {0.0, 65535.0};
        case Unit::Degrees: return {0.0, 90.0};
        case Unit::Flag: return {0.0, 1.0};
        case Unit::Meters: return {-500.0, 9000.0};
    }
    throw std::logic_error("unhandled unit");
}

// GeoTIFF storage type for a unit.
enum class SampleType { Float32, UInt8, UInt16 };

inline SampleType unit_sample_type(Unit u) {
    switch (u) {
        case Unit::Byte: return SampleType::UInt8;
        case Unit::ClassId:
        case Unit::Year:
        case Unit::Flag: return SampleType::UInt16;
        default: return SampleType::Float32;
    }
}

// North-up georeferenced pixel grid. origin is the outer corner of the
// top-left pixel; px_size_y is negative for north-up rasters.
struct GridGeometry {
    int epsg = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double px_size_x = 1.0;
    double px_size_y = -1.0;
    int width = 0;
    int height = 0;

    bool operator==(const GridGeometry&) const = default;

    void check() const {
        if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
        if (px_size_x == 0.0 || px_size_y == 0.0) throw std::invalid_argument("pixel size must be nonzero");
    }

    size_t size() const { return static_cast<size_t>(width) * static_cast<size_t>(height); }
    double pixel_area() const { return std::abs(px_size_x * px_size_y); }

    // Map coordinate of a pixel center.
    double center_x(int col) const { return origin_x + (col + 0.5) * px_size_x; }
    double center_y(int row) const { return origin_y + (row + 0.5) * px_size_y; }

    // Pixel containing a map coordinate; may fall outside [0,w)x[0,h).
    int col_of(double x) const { return static_cast<int>(std::floor((x - origin_x) / px_size_x)); }
    int row_of(double y) const { return static_cast<int>(std::floor((y - origin_y) / px_size_y)); }
};

// One named band. Values are held as float32 regardless of storage type;
// uint8/uint16 payloads are exactly representable.
struct RasterBand {
    std::string name;
    Unit unit = Unit::Index;
    std::optional<float> nodata;
    std::vector<float> values;

    bool is_nodata(float v) const {
        if (std::isnan(v)) return true;
        return nodata && *nodata == v;
    }
    float at(size_t i) const { return values[i]; }
    bool valid_at(size_t i) const { return !is_nodata(values[i]); }
};

inline RasterBand make_band(const std::string& name, Unit unit, size_t n, float fill,
                            std::optional<float> nodata = std::nullopt) {
    RasterBand b;
    b.name = name;
    b.unit = unit;
    b.nodata = nodata;
    b.values.assign(n, fill);
    return b;
}

// A grid plus its co-registered bands.
struct Raster {
    GridGeometry grid;
    std::vector<RasterBand> bands;

    const RasterBand& band(const std::string& name) const {
        for (const auto& b : bands)
            if (b.name == name) return b;
        throw std::out_of_range("no band named '" + name + "'");
    }
    RasterBand& band(const std::string& name) {
        return const_cast<RasterBand&>(static_cast<const Raster*>(this)->band(name));
    }
    bool has_band(const std::string& name) const {
        for (const auto& b : bands)
            if (b.name == name) return true;
        return false;
    }
};

// Domain check used by the GeoTIFF reader and by tests.
void check_band_domain(const RasterBand& band);

}  // namespace palmmap
