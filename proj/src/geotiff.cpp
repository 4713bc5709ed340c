#include "palmmap/raster/geotiff.hpp"

#include <tiffio.h>

#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <sstream>

namespace palmmap {

namespace {

constexpr uint32_t kTagPixelScale = 33550;
constexpr uint32_t kTagTiepoint = 33922;
constexpr uint32_t kTagGeoKeys = 34735;
constexpr uint32_t kTagGdalNodata = 42113;
constexpr int kTileDim = 256;

const TIFFFieldInfo kGeoFields[] = {
    {kTagPixelScale, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1, const_cast<char*>("GeoPixelScale")},
    {kTagTiepoint, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1, const_cast<char*>("GeoTiePoints")},
    {kTagGeoKeys, -1, -1, TIFF_SHORT, FIELD_CUSTOM, 1, 1, const_cast<char*>("GeoKeyDirectory")},
    {kTagGdalNodata, -1, -1, TIFF_ASCII, FIELD_CUSTOM, 1, 0, const_cast<char*>("GDALNoDataValue")},
};

TIFFExtendProc g_parent_extender = nullptr;

void tag_extender(TIFF* tif) {
    TIFFMergeFieldInfo(tif, kGeoFields, sizeof(kGeoFields) / sizeof(kGeoFields[0]));
    if (g_parent_extender) g_parent_extender(tif);
}

void quiet_handler(const char*, const char*, va_list) {}

void init_libtiff_once() {
    static std::once_flag once;
    std::call_once(once, [] {
        g_parent_extender = TIFFSetTagExtender(tag_extender);
        TIFFSetWarningHandler(quiet_handler);
        TIFFSetErrorHandler(quiet_handler);
    });
}

struct TiffCloser {
    void operator()(TIFF* t) const {
        if (t) TIFFClose(t);
    }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

bool is_geographic_epsg(int epsg) { return epsg == 4326 || (epsg >= 4000 && epsg < 5000); }

int sample_bits(SampleType t) {
    switch (t) {
        case SampleType::Float32: return 32;
        case SampleType::UInt8: return 8;
        case SampleType::UInt16: return 16;
    }
    return 0;
}

void write_band(TIFF* tif, const GridGeometry& grid, const RasterBand& band) {
    const SampleType st = unit_sample_type(band.unit);
    const int bits = sample_bits(st);

    TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, static_cast<uint32_t>(grid.width));
    TIFFSetField(tif, TIFFTAG_IMAGELENGTH, static_cast<uint32_t>(grid.height));
    TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, static_cast<uint16_t>(bits));
    TIFFSetField(tif, TIFFTAG_SAMPLEFORMAT,
                 st == SampleType::Float32 ? SAMPLEFORMAT_IEEEFP : SAMPLEFORMAT_UINT);
    TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, static_cast<uint16_t>(1));
    TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif, TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
    TIFFSetField(tif, TIFFTAG_ZIPQUALITY, 1);
    TIFFSetField(tif, TIFFTAG_TILEWIDTH, static_cast<uint32_t>(kTileDim));
    TIFFSetField(tif, TIFFTAG_TILELENGTH, static_cast<uint32_t>(kTileDim));

    double scale[3] = {std::abs(grid.px_size_x), std::abs(grid.px_size_y), 0.0};
    double tie[6] = {0.0, 0.0, 0.0, grid.origin_x, grid.origin_y, 0.0};
    TIFFSetField(tif, kTagPixelScale, 3, scale);
    TIFFSetField(tif, kTagTiepoint, 6, tie);

    const bool geographic = is_geographic_epsg(grid.epsg);
    uint16_t keys[16] = {1,    1, 0, 3,
                         1024, 0, 1, static_cast<uint16_t>(geographic ? 2 : 1),
                         1025, 0, 1, 1,
                         static_cast<uint16_t>(geographic ? 2048 : 3072), 0, 1,
                         static_cast<uint16_t>(grid.epsg)};
    TIFFSetField(tif, kTagGeoKeys, 16, keys);

    if (band.nodata) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(*band.nodata));
        TIFFSetField(tif, kTagGdalNodata, buf);
    }
    TIFFSetField(tif, TIFFTAG_PAGENAME, band.name.c_str());
    std::string desc = "unit=" + unit_name(band.unit);
    TIFFSetField(tif, TIFFTAG_IMAGEDESCRIPTION, desc.c_str());

    const int tiles_x = (grid.width + kTileDim - 1) / kTileDim;
    const int tiles_y = (grid.height + kTileDim - 1) / kTileDim;
    const size_t tile_px = static_cast<size_t>(kTileDim) * kTileDim;
    std::vector<uint8_t> buf(tile_px * (bits / 8));

    for (int ty = 0; ty < tiles_y; ++ty) {
        for (int tx = 0; tx < tiles_x; ++tx) {
            std::memset(buf.data(), 0, buf.size());
            const int x0 = tx * kTileDim, y0 = ty * kTileDim;
            const int w = std::min(kTileDim, grid.width - x0);
            const int h = std::min(kTileDim, grid.height - y0);
            for (int r = 0; r < h; ++r) {
                const float* src = band.values.data() + static_cast<size_t>(y0 + r) * grid.width + x0;
                switch (st) {
                    case SampleType::Float32: {
                        float* dst = reinterpret_cast<float*>(buf.data()) + static_cast<size_t>(r) * kTileDim;
                        std::memcpy(dst, src, static_cast<size_t>(w) * sizeof(float));
                        break;
                    }
                    case SampleType::UInt8: {
                        uint8_t* dst = buf.data() + static_cast<size_t>(r) * kTileDim;
                        for (int c = 0; c < w; ++c) dst[c] = static_cast<uint8_t>(src[c]);
                        break;
                    }
                    case SampleType::UInt16: {
                        uint16_t* dst = reinterpret_cast<uint16_t*>(buf.data()) + static_cast<size_t>(r) * kTileDim;
                        for (int c = 0; c < w; ++c) dst[c] = static_cast<uint16_t>(src[c]);
                        break;
                    }
                }
            }
            tmsize_t tile_bytes = static_cast<tmsize_t>(tile_px) * (bits / 8);
            if (TIFFWriteEncodedTile(tif, TIFFComputeTile(tif, x0, y0, 0, 0), buf.data(), tile_bytes) < 0)
                throw std::runtime_error("tile write failed in '" + band.name + "'");
        }
    }
    if (!TIFFWriteDirectory(tif)) throw std::runtime_error("directory write failed for '" + band.name + "'");
}

}  // namespace

void write_raster(const std::string& path, const Raster& raster) {
    init_libtiff_once();
    raster.grid.check();
    if (raster.bands.empty()) throw std::invalid_argument("write_raster: no bands");
    for (const auto& b : raster.bands) {
        if (b.values.size() != raster.grid.size())
            throw std::invalid_argument("write_raster: band '" + b.name + "' shape mismatch");
    }

    TiffPtr tif(TIFFOpen(path.c_str(), "w"));
    if (!tif) throw std::runtime_error("cannot open '" + path + "' for writing");
    try {
        for (const auto& b : raster.bands) write_band(tif.get(), raster.grid, b);
    } catch (...) {
        tif.reset();
        std::error_code ec;
        std::filesystem::remove(path, ec);
        throw;
    }
}

namespace {

RasterBand read_band_dir(TIFF* tif, GridGeometry& grid, bool first,
                         std::optional<Unit> expected_unit, const std::string& path) {
    uint32_t w = 0, h = 0;
    uint16_t bits = 0, fmt = SAMPLEFORMAT_UINT, spp = 1;
    TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h);
    TIFFGetField(tif, TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &fmt);
    TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &spp);
    if (w == 0 || h == 0) throw std::runtime_error(path + ": missing image dimensions");
    if (spp != 1) throw std::runtime_error(path + ": expected one sample per pixel per directory");

    if (first) {
        uint16_t cnt = 0;
        double* scale = nullptr;
        double* tie = nullptr;
        if (!TIFFGetField(tif, kTagPixelScale, &cnt, &scale) || cnt < 2)
            throw std::runtime_error(path + ": missing geotransform (pixel scale)");
        grid.px_size_x = scale[0];
        grid.px_size_y = -scale[1];
        cnt = 0;
        if (!TIFFGetField(tif, kTagTiepoint, &cnt, &tie) || cnt < 6)
            throw std::runtime_error(path + ": missing geotransform (tiepoint)");
        grid.origin_x = tie[3] - tie[0] * grid.px_size_x;
        grid.origin_y = tie[4] - tie[1] * grid.px_size_y;
        grid.width = static_cast<int>(w);
        grid.height = static_cast<int>(h);
        grid.epsg = 0;
        uint16_t gcnt = 0;
        uint16_t* keys = nullptr;
        if (TIFFGetField(tif, kTagGeoKeys, &gcnt, &keys) && keys) {
            for (int i = 4; i + 3 < gcnt; i += 4) {
                if ((keys[i] == 3072 || keys[i] == 2048) && keys[i + 1] == 0) grid.epsg = keys[i + 3];
            }
        }
    } else if (w != static_cast<uint32_t>(grid.width) || h != static_cast<uint32_t>(grid.height)) {
        throw std::runtime_error(path + ": band dimensions differ between directories");
    }

    RasterBand band;
    char* pagename = nullptr;
    if (TIFFGetField(tif, TIFFTAG_PAGENAME, &pagename) && pagename) band.name = pagename;

    std::optional<Unit> stored_unit;
    char* desc = nullptr;
    if (TIFFGetField(tif, TIFFTAG_IMAGEDESCRIPTION, &desc) && desc) {
        std::string d(desc);
        if (d.rfind("unit=", 0) == 0) stored_unit = unit_from_name(d.substr(5));
    }
    if (stored_unit && expected_unit && *stored_unit != *expected_unit)
        throw std::runtime_error(path + ": band '" + band.name + "' has unit " + unit_name(*stored_unit) +
                                 ", expected " + unit_name(*expected_unit));
    if (!stored_unit && !expected_unit)
        throw std::runtime_error(path + ": no unit metadata and no expected unit given");
    band.unit = stored_unit ? *stored_unit : *expected_unit;

    const SampleType st = unit_sample_type(band.unit);
    const bool ok = (st == SampleType::Float32 && bits == 32 && fmt == SAMPLEFORMAT_IEEEFP) ||
                    (st == SampleType::UInt8 && bits == 8 && fmt == SAMPLEFORMAT_UINT) ||
                    (st == SampleType::UInt16 && bits == 16 && fmt == SAMPLEFORMAT_UINT);
    if (!ok)
        throw std::runtime_error(path + ": sample type (" + std::to_string(bits) +
                                 " bits) incompatible with unit " + unit_name(band.unit));

    char* nd = nullptr;
    if (TIFFGetField(tif, kTagGdalNodata, &nd) && nd) band.nodata = std::strtof(nd, nullptr);

    band.values.assign(static_cast<size_t>(w) * h, 0.0f);
    const int bytes = bits / 8;

    auto scatter = [&](const uint8_t* src, int sx0, int sy0, int sw, int sh, int src_stride) {
        for (int r = 0; r < sh; ++r) {
            if (sy0 + r >= static_cast<int>(h)) break;
            float* dst = band.values.data() + static_cast<size_t>(sy0 + r) * w + sx0;
            const uint8_t* s = src + static_cast<size_t>(r) * src_stride * bytes;
            int cw = std::min(sw, static_cast<int>(w) - sx0);
            for (int c = 0; c < cw; ++c) {
                switch (st) {
                    case SampleType::Float32: dst[c] = reinterpret_cast<const float*>(s)[c]; break;
                    case SampleType::UInt8: dst[c] = s[c]; break;
                    case SampleType::UInt16: dst[c] = reinterpret_cast<const uint16_t*>(s)[c]; break;
                }
            }
        }
    };

    if (TIFFIsTiled(tif)) {
        uint32_t tw = 0, th = 0;
        TIFFGetField(tif, TIFFTAG_TILEWIDTH, &tw);
        TIFFGetField(tif, TIFFTAG_TILELENGTH, &th);
        std::vector<uint8_t> buf(static_cast<size_t>(tw) * th * bytes);
        for (uint32_t y0 = 0; y0 < h; y0 += th) {
            for (uint32_t x0 = 0; x0 < w; x0 += tw) {
                if (TIFFReadEncodedTile(tif, TIFFComputeTile(tif, x0, y0, 0, 0), buf.data(),
                                        static_cast<tmsize_t>(buf.size())) < 0)
                    throw std::runtime_error(path + ": tile read failed");
                scatter(buf.data(), static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(tw),
                        static_cast<int>(th), static_cast<int>(tw));
            }
        }
    } else {
        uint32_t rows_per_strip = 0;
        TIFFGetFieldDefaulted(tif, TIFFTAG_ROWSPERSTRIP, &rows_per_strip);
        if (rows_per_strip == 0 || rows_per_strip > h) rows_per_strip = h;
        std::vector<uint8_t> buf(static_cast<size_t>(w) * rows_per_strip * bytes);
        for (uint32_t y0 = 0; y0 < h; y0 += rows_per_strip) {
            tstrip_t strip = TIFFComputeStrip(tif, y0, 0);
            if (TIFFReadEncodedStrip(tif, strip, buf.data(), static_cast<tmsize_t>(buf.size())) < 0)
                throw std::runtime_error(path + ": strip read failed");
            scatter(buf.data(), 0, static_cast<int>(y0), static_cast<int>(w),
                    static_cast<int>(std::min(rows_per_strip, h - y0)), static_cast<int>(w));
        }
    }
    return band;
}

}  // namespace

void check_band_domain(const RasterBand& band) {
    auto [lo, hi] = unit_domain(band.unit);
    for (size_t i = 0; i < band.values.size(); ++i) {
        float v = band.values[i];
        if (band.is_nodata(v)) continue;
        if (v < lo || v > hi)
            throw std::runtime_error("band '" + band.name + "': value " + std::to_string(v) +
                                     " outside " + unit_name(band.unit) + " domain [" +
                                     std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
}

Raster read_raster(const std::string& path, std::optional<Unit> expected_unit) {
    init_libtiff_once();
    if (!std::filesystem::exists(path)) throw std::runtime_error("no such file: '" + path + "'");
    TiffPtr tif(TIFFOpen(path.c_str(), "r"));
    if (!tif) throw std::runtime_error("cannot open '" + path + "' as TIFF");

    Raster out;
    bool first = true;
    do {
        out.bands.push_back(read_band_dir(tif.get(), out.grid, first, expected_unit, path));
        first = false;
    } while (TIFFReadDirectory(tif.get()));

    for (auto& b : out.bands) check_band_domain(b);
    return out;
}

std::string unit_name(Unit u) {
    switch (u) {
        case Unit::Db: return "dB";
        case Unit::Reflectance: return "reflectance";
        case Unit::Index: return "index";
        case Unit::Byte: return "byte";
        case Unit::ClassId: return "class_id";
        case Unit::Year: return "year";
        case Unit::Degrees: return "degrees";
        case Unit::Flag: return "flag";
        case Unit::Meters: return "meters";
    }
    throw std::logic_error("unhandled unit");
}

Unit unit_from_name(const std::string& name) {
    if (name == "dB") return Unit::Db;
    if (name == "reflectance") return Unit::Reflectance;
    if (name == "index") return Unit::Index;
    if (name == "byte") return Unit::Byte;
    if (name == "class_id") return Unit::ClassId;
    if (name == "year") return Unit::Year;
    if (name == "degrees") return Unit::Degrees;
    if (name == "flag") return Unit::Flag;
    if (name == "meters") return Unit::Meters;
    throw std::invalid_argument("unknown unit '" + name + "'");
}

}  // namespace palmmap
