#ifndef MMSAR_FFT_HPP
#define MMSAR_FFT_HPP

#include <span>
#include <vector>

#include "mmsar/raster.hpp"

namespace mmsar {

enum class FftDirection { Forward, Inverse };

/// In-place unnormalised 1D transform (forward uses exp(-j...)).
void fft_inplace(std::span<cplx> data, FftDirection dir);

/// In-place unnormalised transform of every row (along range).
void fft_rows(ComplexRaster& img, FftDirection dir);

/// In-place unnormalised transform of every column (along azimuth).
void fft_cols(ComplexRaster& img, FftDirection dir);

/// Unitary 2D DFT (1/sqrt(N) per axis). Energy is preserved exactly.
ComplexRaster dft2(const ComplexRaster& img);

/// Inverse of dft2 under the same unitary convention.
ComplexRaster idft2(const ComplexRaster& spec);

/// Signed frequency of DFT bin k for n samples at sampling rate fs.
double bin_frequency(std::size_t k, std::size_t n, double fs);

}  // namespace mmsar

#endif
