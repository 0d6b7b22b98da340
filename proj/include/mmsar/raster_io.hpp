#ifndef MMSAR_RASTER_IO_HPP
#define MMSAR_RASTER_IO_HPP

#include <filesystem>

#include "json.hpp"
#include "mmsar/raster.hpp"

namespace mmsar {

// MMSR layout (little endian): "MMSR", u32 version = 1, u64 n_az, u64 n_rg,
// then n_az*n_rg interleaved float32 (re, im). Metadata lives in a UTF-8 JSON
// sidecar next to the raster (`<path>.json`).
inline constexpr std::uint32_t kMmsrVersion = 1;

void write_raster(const std::filesystem::path& path, const ComplexRaster& img);
ComplexRaster read_raster(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);

nlohmann::json meta_to_json(const AcquisitionMeta& meta);
AcquisitionMeta meta_from_json(const nlohmann::json& j);

/// Rounds every sample to float32 precision, i.e. what a write/read cycle keeps.
ComplexRaster quantize_f32(const ComplexRaster& img);

}  // namespace mmsar

#endif
