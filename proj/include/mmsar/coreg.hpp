#ifndef MMSAR_COREG_HPP
#define MMSAR_COREG_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmsar/offsets.hpp"
#include "mmsar/raster.hpp"
#include "mmsar/spectral.hpp"
#include "mmsar/subaperture.hpp"

namespace mmsar::coreg {

enum class DopplerCentroidStrategy { Polynomials };

struct CoregConfig {
    std::size_t n_points = 1450;
    double corr_threshold = 0.8;
    std::size_t oversampling = 1200;
    std::size_t window_az = 10;
    std::size_t window_rg = 10;
    std::size_t skimming = 30;
    bool use_dem = false;
    DopplerCentroidStrategy doppler_centroid_strategy = DopplerCentroidStrategy::Polynomials;

    // Integer search half-width in px; 0 means half the window.
    std::size_t search_radius = 0;
    // Complex oversampling of the patches before amplitude detection.
    std::size_t patch_oversampling = 2;
    std::size_t warp_degree = 1;
    subap::PairMode pair_mode = subap::PairMode::Adjacent;
    // A selected point suppresses weaker candidates closer than these
    // distances on both axes (0 = off).
    std::size_t min_separation_az = 0;
    std::size_t min_separation_rg = 0;
    // Candidates dimmer than this fraction of the brightest pixel are ignored (0 = off).
    double min_relative_amplitude = 0;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

nlohmann::json config_to_json(const CoregConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
CoregConfig config_from_json(const nlohmann::json& j);

/// Brightest pixels in amplitude rank order (row-major tie-break), decimated
/// by cfg.skimming, at least window/2 from every border.
std::vector<PixelCoord> select_points(const ComplexRaster& master, const CoregConfig& cfg);

/// Whole-image offset from a block-averaged amplitude NCC, in px.
PixelCoord coarse_offset(const ComplexRaster& master, const ComplexRaster& slave, std::size_t block = 4);

/// Offset of the slave patch relative to the master patch around `at`.
/// The integer search is centred on `seed`. The sub-pixel part comes from a
/// zoomed correlation of tapered, oversampled amplitude patches, repeated
/// after resampling the slave by the running estimate until it settles.
OffsetSample match_patch(const ComplexRaster& master, const ComplexRaster& slave, PixelCoord at,
                         const CoregConfig& cfg, PixelCoord seed = {});

struct WarpSample {
    PixelCoord pixel;
    OffsetSample offset;
};

/// Polynomial in (row, col) per axis over monomials
/// 1, r, c, r^2, r c, c^2, ... up to total degree `degree`.
struct WarpModel {
    std::size_t degree = 0;
    std::vector<double> coef_rg;
    std::vector<double> coef_az;
    double residual_rms = 0;
    std::size_t used = 0;
    std::size_t rejected = 0;

    /// Predicted {d_rg, d_az} at a pixel.
    std::array<double, 2> operator()(double row, double col) const;
};

std::size_t warp_terms(std::size_t degree);

/// Least squares with up to three rounds of 3-sigma residual rejection.
/// Invalid samples are ignored.
WarpModel fit_warp(const std::vector<WarpSample>& samples, std::size_t degree);

struct TrackResult {
    std::vector<OffsetSeries> series;
    std::vector<WarpModel> warps;  // one per image pair
    std::size_t dropped_points = 0;
};

/// Matches every selected point across the stack pairs, removes the warp
/// prediction and returns per-point series relative to the first epoch.
TrackResult track(const subap::SubApertureStack& stack, const CoregConfig& cfg);

}  // namespace mmsar::coreg

#endif
