#include "mmsar/focuser.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"
#include "mmsar/parallel.hpp"

namespace mmsar::focus {

ComplexRaster range_compress(const ComplexRaster& raw, double chirp_bandwidth, double chirp_duration) {
    const auto& meta = raw.meta();
    if (!(meta.fs_rg > 0)) throw InvalidMeta("range compression needs fs_rg > 0");
    if (!(chirp_bandwidth > 0) || !(chirp_duration > 0))
        throw InvalidChirp("chirp bandwidth and duration must be positive");
    if (chirp_bandwidth > meta.fs_rg)
        throw InvalidChirp("chirp bandwidth " + std::to_string(chirp_bandwidth) + " Hz exceeds fs_rg " +
                           std::to_string(meta.fs_rg) + " Hz");
    const auto n_chirp = static_cast<std::size_t>(std::lround(chirp_duration * meta.fs_rg));
    const std::size_t n = raw.n_rg();
    if (n_chirp < 1 || n_chirp > n)
        throw InvalidChirp("chirp spans " + std::to_string(n_chirp) + " samples; raster has " + std::to_string(n));

    const double rate = chirp_bandwidth / chirp_duration;
    std::vector<cplx> ref(n);
    for (std::size_t j = 0; j < n_chirp; ++j) {
        const double t = static_cast<double>(j) / meta.fs_rg - chirp_duration / 2;
        ref[j] = std::polar(1.0, kPi * rate * t * t);
    }
    fft_inplace(ref, FftDirection::Forward);
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n_chirp));
    for (auto& v : ref) v = std::conj(v) * scale;

    ComplexRaster out = raw;
    fft_rows(out, FftDirection::Forward);
    for (std::size_t r = 0; r < out.n_az(); ++r) {
        auto row = out.row(r);
        for (std::size_t j = 0; j < n; ++j) row[j] *= ref[j];
    }
    fft_rows(out, FftDirection::Inverse);
    out.meta().chirp_bandwidth = 0;
    out.meta().chirp_duration = 0;
    return out;
}

ComplexRaster azimuth_compress(const ComplexRaster& rc) {
    const auto& m = rc.meta();
    if (!(m.v_p > 0)) throw InvalidMeta("azimuth compression needs v_p > 0");
    if (!(m.wavelength > 0)) throw InvalidMeta("azimuth compression needs wavelength > 0");
    if (!(m.prf > 0) || !(m.L > 0) || !(m.fs_rg > 0)) throw InvalidMeta("azimuth compression needs prf, L and fs_rg");
    if (!(m.gamma > 0) || m.gamma > kPi / 2 + 1e-12) throw InvalidMeta("gamma must lie in (0, pi/2]");

    const std::size_t n = rc.n_az();
    const double dx = m.azimuth_spacing();
    const double span = m.illuminated_span();
    const double cot_g = std::cos(m.gamma) / std::sin(m.gamma);
    const auto half_lines = static_cast<std::ptrdiff_t>(std::ceil(span / dx)) + 2;

    ComplexRaster out(n, rc.n_rg(), m);
    parallel_for(rc.n_rg(), [&](std::size_t col) {
        const double r0 = m.range_of(static_cast<double>(col));
        const double centre = -r0 * cot_g;  // platform-minus-target offset at beam centre
        // the kernel support is centred on `centre`, which can be many lines away
        const auto mid = static_cast<std::ptrdiff_t>(std::lround(centre / dx));
        std::vector<cplx> kernel(n);
        std::size_t count = 0;
        for (std::ptrdiff_t k = mid - half_lines; k <= mid + half_lines; ++k) {
            const double offset = static_cast<double>(k) * dx;
            if (std::abs(offset - centre) > span / 2) continue;
            if (count >= n) throw InvalidMeta("synthetic aperture longer than the azimuth extent of the raster");
            const double range = std::hypot(r0, offset);
            const auto idx = static_cast<std::size_t>(((k % static_cast<std::ptrdiff_t>(n)) + static_cast<std::ptrdiff_t>(n)) %
                                                      static_cast<std::ptrdiff_t>(n));
            kernel[idx] += std::polar(1.0, -4.0 * kPi * range / m.wavelength);
            ++count;
        }
        if (count == 0) throw InvalidMeta("synthetic aperture shorter than one azimuth line");
        fft_inplace(kernel, FftDirection::Forward);

        std::vector<cplx> line(n);
        for (std::size_t r = 0; r < n; ++r) line[r] = rc(r, col);
        fft_inplace(line, FftDirection::Forward);
        for (std::size_t k = 0; k < n; ++k) line[k] *= std::conj(kernel[k]);
        fft_inplace(line, FftDirection::Inverse);
        const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(count));
        for (std::size_t r = 0; r < n; ++r) out(r, col) = line[r] * scale;
    });
    return out;
}

ComplexRaster focus(const ComplexRaster& raw) {
    if (raw.meta().chirp_bandwidth > 0)
        return azimuth_compress(range_compress(raw, raw.meta().chirp_bandwidth, raw.meta().chirp_duration));
    return azimuth_compress(raw);
}

}  // namespace mmsar::focus
