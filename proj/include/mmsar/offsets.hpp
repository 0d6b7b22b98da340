#ifndef MMSAR_OFFSETS_HPP
#define MMSAR_OFFSETS_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "mmsar/spectral.hpp"

namespace mmsar {

/// One sub-pixel offset of a slave patch relative to the master patch.
/// d_rg is along columns, d_az along rows; theta = atan2(d_az, d_rg).
struct OffsetSample {
    double d_rg = 0;
    double d_az = 0;
    double peak_corr = 0;
    double theta = 0;
    double magnitude = 0;
    bool valid = true;

    static OffsetSample from(double d_rg, double d_az, double peak_corr, bool valid = true) {
        return {d_rg, d_az, peak_corr, std::atan2(d_az, d_rg), std::hypot(d_rg, d_az), valid};
    }
};

/// Offset history of one tracked point across sub-aperture epochs.
struct OffsetSeries {
    std::size_t point_id = 0;
    PixelCoord pixel;
    std::vector<std::size_t> band_index;  // plan band of each sample
    std::vector<double> epochs;           // s, strictly increasing
    std::vector<OffsetSample> samples;

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (const auto& s : samples) n += s.valid ? 1 : 0;
        return n;
    }
};

}  // namespace mmsar

#endif
