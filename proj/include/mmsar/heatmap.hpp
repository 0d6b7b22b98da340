#ifndef MMSAR_HEATMAP_HPP
#define MMSAR_HEATMAP_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmsar/modal.hpp"
#include "mmsar/raster.hpp"

namespace mmsar::report {

enum class HeatScale { Linear, Quantile };

struct GrayImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint16_t> levels;
    bool operator==(const GrayImage&) const = default;
};

/// Percentile with linear interpolation between order statistics (NaN ignored).
double percentile(std::vector<double> values, double p);

/// Maps finite values to 0..65535. Linear spans min..max, quantile spans the
/// 1st..99th percentile and clips; a flat span renders mid-gray. NaN cells
/// render 0. All-NaN or empty grids throw RenderError.
GrayImage to_gray(const RealGrid& values, HeatScale scale);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian).
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

void render_heatmap(const RealGrid& values, const std::filesystem::path& out_path, HeatScale scale);

/// Point energies on a rows x cols grid, NaN where no point sits.
RealGrid energy_grid(const modal::VibrationMap& map, std::size_t rows, std::size_t cols);

}  // namespace mmsar::report

#endif
