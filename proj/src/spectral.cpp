#include "mmsar/spectral.hpp"

#include <cmath>
#include <string>

#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"

namespace mmsar {
namespace {

// Places an n-point spectrum into an m-point spectrum (m >= n) keeping signed
// frequencies; an even-length Nyquist bin is split across +/- halves.
void zero_pad_axis(const std::vector<cplx>& in, std::size_t n, std::vector<cplx>& out, std::size_t m) {
    out.assign(m, cplx{});
    if (m == n) {
        out = in;
        return;
    }
    const std::size_t pos = (n + 1) / 2;  // bins 0..pos-1 are non-negative
    for (std::size_t k = 0; k < pos; ++k) out[k] = in[k];
    for (std::size_t k = pos; k < n; ++k) out[m - (n - k)] = in[k];
    if (n % 2 == 0) {
        const cplx nyq = in[n / 2];
        out[m - n / 2] = nyq * 0.5;
        out[n / 2] = nyq * 0.5;
    }
}

}  // namespace

double window_weight(const BandWindow& win, double f) {
    const double half = win.bandwidth / 2;
    const double d = f - win.center;
    const double tol = 1e-12 * win.bandwidth;  // band edges computed from sums of fractions
    if (d < -half - tol || d >= half - tol) return 0.0;
    if (win.taper == Taper::Rect) return 1.0;
    return 0.5 * (1.0 + std::cos(2.0 * kPi * d / win.bandwidth));
}

ComplexRaster bandpass_azimuth(const ComplexRaster& spec, const BandWindow& win) {
    const double prf = spec.meta().prf;
    if (!(prf > 0)) throw InvalidMeta("bandpass needs a positive prf");
    if (!(win.bandwidth > 0)) throw InvalidBand("band window bandwidth must be > 0");
    const double tol = 1e-9 * prf;
    if (std::abs(win.center) + win.bandwidth / 2 > prf / 2 + tol)
        throw InvalidBand("band window [" + std::to_string(win.low()) + ", " + std::to_string(win.high()) +
                          "] Hz exceeds the azimuth Nyquist band of +/-" + std::to_string(prf / 2) + " Hz");

    ComplexRaster out = spec;
    const std::size_t n = spec.n_az();
    const double bin_tol = 1e-9 * prf / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, prf);
        const bool inside = f >= win.low() - bin_tol && f < win.high() - bin_tol;
        auto row = out.row(k);
        if (!inside) {
            for (auto& v : row) v = cplx{};
        } else if (win.taper == Taper::Hann) {
            const double w = 0.5 * (1.0 + std::cos(2.0 * kPi * (f - win.center) / win.bandwidth));
            for (auto& v : row) v *= w;
        }
    }
    out.meta().doppler_center = win.center;
    return out;
}

ComplexRaster oversample_patch(const ComplexRaster& img, PixelCoord center, std::size_t half_size,
                               std::size_t factor) {
    if (factor < 1) throw InvalidInput("oversampling factor must be >= 1");
    const auto h = static_cast<std::ptrdiff_t>(half_size);
    if (center.row - h < 0 || center.col - h < 0 || center.row + h >= static_cast<std::ptrdiff_t>(img.n_az()) ||
        center.col + h >= static_cast<std::ptrdiff_t>(img.n_rg()))
        throw OutOfRange("patch of half size " + std::to_string(half_size) + " at (" + std::to_string(center.row) +
                         ", " + std::to_string(center.col) + ") leaves the image");

    const std::size_t n = 2 * half_size + 1;
    const std::size_t m = n * factor;
    ComplexRaster patch(n, n, img.meta());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            patch(r, c) = img(static_cast<std::size_t>(center.row - h) + r, static_cast<std::size_t>(center.col - h) + c);

    AcquisitionMeta meta = img.meta();
    meta.t_start += static_cast<double>(center.row - h) / meta.prf;
    meta.near_range += static_cast<double>(center.col - h) * meta.range_spacing();
    meta.prf *= static_cast<double>(factor);
    meta.fs_rg *= static_cast<double>(factor);
    if (factor == 1) {
        patch.meta() = meta;
        return patch;
    }

    fft_rows(patch, FftDirection::Forward);
    fft_cols(patch, FftDirection::Forward);

    // pad columns of each row, then rows
    ComplexRaster wide(n, m);
    std::vector<cplx> in(n), out;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) in[c] = patch(r, c);
        zero_pad_axis(in, n, out, m);
        for (std::size_t c = 0; c < m; ++c) wide(r, c) = out[c];
    }
    ComplexRaster result(m, m, meta);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < n; ++r) in[r] = wide(r, c);
        zero_pad_axis(in, n, out, m);
        for (std::size_t r = 0; r < m; ++r) result(r, c) = out[r];
    }
    fft_rows(result, FftDirection::Inverse);
    fft_cols(result, FftDirection::Inverse);
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (auto& v : result.data()) v *= scale;
    return result;
}

ComplexRaster spectral_shift(const ComplexRaster& img, double d_az, double d_rg) {
    ComplexRaster out = img;
    fft_rows(out, FftDirection::Forward);
    fft_cols(out, FftDirection::Forward);
    const std::size_t na = img.n_az(), nr = img.n_rg();
    for (std::size_t k = 0; k < na; ++k) {
        const double fa = bin_frequency(k, na, 1.0);
        for (std::size_t l = 0; l < nr; ++l) {
            const double fr = bin_frequency(l, nr, 1.0);
            out(k, l) *= std::polar(1.0, -2.0 * kPi * (fa * d_az + fr * d_rg));
        }
    }
    fft_rows(out, FftDirection::Inverse);
    fft_cols(out, FftDirection::Inverse);
    const double scale = 1.0 / static_cast<double>(img.size());
    for (auto& v : out.data()) v *= scale;
    return out;
}

}  // namespace mmsar
