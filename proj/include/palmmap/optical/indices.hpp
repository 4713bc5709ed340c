#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace palmmap {

// Normalized difference vegetation index. Both inputs zero -> NaN.
inline double ndvi(double nir, double red) {
    double den = nir + red;
    if (den == 0.0) return std::nan("");
    return (nir - red) / den;
}

// Bare soil index over (swir1, red, nir, blue). Zero denominator -> NaN.
inline double bsi(double swir1, double red, double nir, double blue) {
    double a = swir1 + red;
    double b = nir + blue;
    if (a + b == 0.0) return std::nan("");
    return (a - b) / (a + b);
}

// CFMASK-style QA bit lists; a pixel is invalid if any listed bit is set.
struct QaSpec {
    std::vector<int> cloud_bits{3};
    std::vector<int> shadow_bits{4};
    std::vector<int> fill_bits{0};

    void check() const {
        auto ok = [](const std::vector<int>& v) {
            for (int b : v)
                if (b < 0 || b > 15) return false;
            return true;
        };
        if (!ok(cloud_bits) || !ok(shadow_bits) || !ok(fill_bits))
            throw std::invalid_argument("QA bit positions must be in [0,15]");
    }
};

inline bool qa_mask(uint16_t qa_value, const QaSpec& spec) {
    auto any_set = [qa_value](const std::vector<int>& bits) {
        for (int b : bits)
            if (qa_value & (1u << b)) return true;
        return false;
    };
    return !(any_set(spec.cloud_bits) || any_set(spec.shadow_bits) || any_set(spec.fill_bits));
}

}  // namespace palmmap
