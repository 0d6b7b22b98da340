#ifndef MMSAR_RASTER_HPP
#define MMSAR_RASTER_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mmsar {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Acquisition parameters carried alongside every raster.
///
/// `near_range` and the chirp fields extend the minimal geometry so that a
/// raster file alone is enough to focus it. A zero chirp bandwidth marks data
/// that is already range compressed.
struct AcquisitionMeta {
    double prf = 0;             // Hz, azimuth sampling
    double fs_rg = 0;           // Hz, range sampling
    double wavelength = 0;      // m
    double v_p = 0;             // m/s, platform velocity
    double L = 0;               // m, synthetic aperture (perpendicular to beam centre)
    double incidence = 0;       // rad
    double gamma = kPi / 2;     // rad, velocity vector vs. line of sight
    double t_start = 0;         // s, slow time of row 0
    double doppler_center = 0;  // Hz, baseband (aliased into [-prf/2, prf/2))
    double near_range = 0;      // m, slant range of column 0
    double chirp_bandwidth = 0; // Hz
    double chirp_duration = 0;  // s

    /// Slant-range spacing of one range sample.
    double range_spacing() const { return kSpeedOfLight / (2.0 * fs_rg); }
    /// Along-track spacing of one azimuth line.
    double azimuth_spacing() const { return v_p / prf; }
    /// Slant range at the centre of column `col`.
    double range_of(double col) const { return near_range + col * range_spacing(); }
    /// Along-track platform coordinate of row `row`.
    double along_track_of(double row) const { return v_p * (t_start + row / prf); }
    /// Along-track span over which a target is illuminated.
    double illuminated_span() const;

    /// Throws InvalidMeta when any invariant is violated.
    void validate() const;
};

struct RasterShape {
    std::size_t n_az = 0;
    std::size_t n_rg = 0;
};

/// Row-major complex image: azimuth = rows, range = columns.
class ComplexRaster {
public:
    ComplexRaster() = default;
    ComplexRaster(std::size_t n_az, std::size_t n_rg, AcquisitionMeta meta = {});
    ComplexRaster(std::size_t n_az, std::size_t n_rg, std::vector<cplx> data, AcquisitionMeta meta = {});

    std::size_t n_az() const noexcept { return n_az_; }
    std::size_t n_rg() const noexcept { return n_rg_; }
    std::size_t size() const noexcept { return data_.size(); }
    RasterShape shape() const noexcept { return {n_az_, n_rg_}; }

    cplx& operator()(std::size_t row, std::size_t col) { return data_[row * n_rg_ + col]; }
    const cplx& operator()(std::size_t row, std::size_t col) const { return data_[row * n_rg_ + col]; }

    std::span<cplx> row(std::size_t r) { return {data_.data() + r * n_rg_, n_rg_}; }
    std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * n_rg_, n_rg_}; }

    std::vector<cplx>& data() noexcept { return data_; }
    const std::vector<cplx>& data() const noexcept { return data_; }

    AcquisitionMeta& meta() noexcept { return meta_; }
    const AcquisitionMeta& meta() const noexcept { return meta_; }

    double energy() const;
    bool same_shape(const ComplexRaster& other) const noexcept {
        return n_az_ == other.n_az_ && n_rg_ == other.n_rg_;
    }

private:
    std::size_t n_az_ = 0;
    std::size_t n_rg_ = 0;
    std::vector<cplx> data_;
    AcquisitionMeta meta_;
};

/// Real-valued companion grid (amplitudes, heatmaps).
struct RealGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

RealGrid amplitude(const ComplexRaster& img);

}  // namespace mmsar

#endif
