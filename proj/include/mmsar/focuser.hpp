#ifndef MMSAR_FOCUSER_HPP
#define MMSAR_FOCUSER_HPP

#include "mmsar/raster.hpp"

namespace mmsar::focus {

/// Matched filtering along range against the linear chirp used at synthesis.
/// The compressed peak of an echo lands on the column of its slant range and
/// has the echo's amplitude. Output meta has the chirp fields cleared.
ComplexRaster range_compress(const ComplexRaster& raw, double chirp_bandwidth, double chirp_duration);

/// Per-range-gate azimuth correlation with the hyperbolic phase history over
/// the illuminated span. A static target at along-track x focuses on the row
/// whose platform position equals x, with its echo amplitude as peak value.
ComplexRaster azimuth_compress(const ComplexRaster& rc);

/// Range then azimuth compression; range compression is skipped when the
/// input meta carries no chirp (already compressed).
ComplexRaster focus(const ComplexRaster& raw);

}  // namespace mmsar::focus

#endif
