#ifndef MMSAR_SPECTRAL_HPP
#define MMSAR_SPECTRAL_HPP

#include <cstddef>

#include "mmsar/raster.hpp"

namespace mmsar {

enum class Taper { Rect, Hann };

/// Azimuth (Doppler) pass band, in baseband Hz.
struct BandWindow {
    double center = 0;
    double bandwidth = 0;
    Taper taper = Taper::Rect;

    double low() const { return center - bandwidth / 2; }
    double high() const { return center + bandwidth / 2; }
};

/// Zeroes every azimuth-frequency row of a 2D spectrum outside the half-open
/// band [center - bw/2, center + bw/2) and applies the taper inside. The
/// range axis is untouched; the output's doppler_center becomes win.center.
ComplexRaster bandpass_azimuth(const ComplexRaster& spec, const BandWindow& win);

/// Taper weight of the window at frequency f (0 outside the band).
double window_weight(const BandWindow& win, double f);

struct PixelCoord {
    std::ptrdiff_t row = 0;
    std::ptrdiff_t col = 0;
    bool operator==(const PixelCoord&) const = default;
};

/// Spectral (zero-padded) interpolation of the (2h+1)x(2h+1) patch centred on
/// `center` by `factor` along both axes. Output sample m maps to input offset
/// m / factor from the patch origin; DC gain is preserved.
ComplexRaster oversample_patch(const ComplexRaster& img, PixelCoord center, std::size_t half_size,
                               std::size_t factor);

/// Periodic band-limited translation: content at (r, c) moves to
/// (r + d_az, c + d_rg).
ComplexRaster spectral_shift(const ComplexRaster& img, double d_az, double d_rg);

}  // namespace mmsar

#endif
