#ifndef MMSAR_SUBAPERTURE_HPP
#define MMSAR_SUBAPERTURE_HPP

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "mmsar/raster.hpp"
#include "mmsar/spectral.hpp"

namespace mmsar::subap {

/// Doppler tiling of the processed azimuth band into overlapping windows.
/// Centres increase with band index; since Doppler falls with slow time,
/// epoch_times decrease with band index.
struct FrequencyPlan {
    std::size_t n_bands = 0;
    double bandwidth = 0;
    double overlap_fraction = 0;
    std::vector<double> centers;      // Hz
    std::vector<double> epoch_times;  // s, per band
    double doppler_center = 0;        // Hz
    double doppler_rate = 0;          // Hz/s (negative)
    double prf = 0;
    Taper taper = Taper::Rect;

    BandWindow window(std::size_t band) const { return {centers.at(band), bandwidth, taper}; }
    /// Slow time between adjacent epochs.
    double epoch_spacing() const;
    /// Slow-time support of one band.
    double window_duration() const;
    /// Highest vibration frequency the epoch sampling can represent.
    double max_observable_frequency() const;
    /// Throws PlanInfeasible when the invariants do not hold.
    void validate() const;
};

/// Uniform tiling of [dc - B/2, dc + B/2], B = prf - 2|dc|, with n_bands
/// windows of equal width overlapping by overlap_fraction. Epochs come from
/// the Doppler rate -2 v^2 sin^3(gamma) / (lambda R) at the scene-centre
/// range R (mid column of `shape`). A positive processed_bandwidth narrows B
/// so the bands avoid the edges of the targets' Doppler support.
FrequencyPlan make_plan(const AcquisitionMeta& meta, RasterShape shape, std::size_t n_bands, double overlap_fraction,
                        Taper taper = Taper::Rect, double processed_bandwidth = 0);

/// Doppler rate (Hz/s) at closest-approach range r.
double doppler_rate(const AcquisitionMeta& meta, double r);

enum class PairMode { Adjacent, FixedMaster };

/// Sub-aperture SLCs in ascending epoch order. images[0] is the master.
struct SubApertureStack {
    std::vector<ComplexRaster> images;
    std::vector<std::size_t> band_index;  // plan band of each image
    std::vector<double> epoch_times;      // strictly increasing
    FrequencyPlan plan;

    const ComplexRaster& master() const { return images.front(); }
    std::size_t size() const { return images.size(); }
};

/// Per band: dft2, bandpass_azimuth, idft2, focus. Bands run in parallel.
SubApertureStack decompose(const ComplexRaster& raw, const FrequencyPlan& plan);

/// Band-limited raw data for one band (the pre-focus sub-aperture).
ComplexRaster band_raw(const ComplexRaster& spectrum, const FrequencyPlan& plan, std::size_t band);

nlohmann::json plan_to_json(const FrequencyPlan& plan);
FrequencyPlan plan_from_json(const nlohmann::json& j);

/// Writes band_000.mmsr... in epoch order plus plan.json.
void write_stack(const std::filesystem::path& dir, const SubApertureStack& stack);
SubApertureStack read_stack(const std::filesystem::path& dir);

}  // namespace mmsar::subap

namespace mmsar {
using subap::FrequencyPlan;
}

#endif
