#pragma once

#include <map>
#include <span>
#include <vector>

#include "palmmap/raster/manifest.hpp"
#include "palmmap/raster/grid.hpp"

namespace palmmap {

// Annual backscatter composite: per-pixel trimmed mean of VV/VH in dB,
// incidence-angle normalization, VH-VV difference, byte-scaled copies.

struct ByteRange {
    double lo;
    double hi;
};

struct CompositeParams {
    double trim_fraction = 0.2;
    double theta_ref = 37.5;        // mid IW swath
    bool fit_slope = true;          // per orbit direction; falls back to default_slope
    double default_slope = -0.1;    // dB per degree
    ByteRange vv_range{-25.0, 0.0};
    ByteRange vh_range{-32.0, -2.0};
    ByteRange diff_range{-15.0, 3.0};
    int tile = 256;
    int workers = 1;
};

// Mean of the values left after dropping the floor(trim_fraction*n) smallest.
// Empty input yields NaN (nodata), not an error.
double trimmed_mean(std::span<const float> values, double trim_fraction);

// First-order linear angle correction in dB about theta_ref.
inline double normalize_incidence(double sigma_db, double theta_deg, double theta_ref,
                                  double slope_db_per_deg) {
    return sigma_db - slope_db_per_deg * (theta_deg - theta_ref);
}

// OLS slope of backscatter on incidence angle. Requires >= 10 pairs spanning
// >= 5 degrees; otherwise callers should use the fixed default slope.
double estimate_angle_slope(const std::vector<std::pair<double, double>>& db_by_deg);

// round(255*clamp((v-lo)/(hi-lo),0,1)), round-half-up. Input nodata maps to
// byte 0; validity travels in a separate mask band (bytes use the full range).
RasterBand byte_scale(const RasterBand& db_band, double lo, double hi);

struct CompositeInfo {
    int year = 0;
    int n_scenes = 0;
    std::map<std::string, double> slope_by_orbit;  // "ASC"/"DESC" -> fitted or default slope
    CompositeParams params;
};

// Bands: vv_mean, vh_mean, vhvv_diff (dB, nodata -9999); vv_byte, vh_byte,
// diff_byte (byte); valid (flag). A pixel with zero valid observations in
// either polarization is nodata in all bands and has valid=0.
struct AnnualComposite {
    Raster raster;
    CompositeInfo info;
};

AnnualComposite build_annual_composite(const SceneManifest& manifest, int year,
                                       const CompositeParams& params);

}  // namespace palmmap
