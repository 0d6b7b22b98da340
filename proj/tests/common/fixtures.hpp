#ifndef MMSAR_TEST_FIXTURES_HPP
#define MMSAR_TEST_FIXTURES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "mmsar/raster.hpp"
#include "mmsar/coreg.hpp"
#include "mmsar/scene.hpp"
#include "mmsar/subaperture.hpp"

namespace fixtures {

using mmsar::ComplexRaster;
using mmsar::cplx;
using mmsar::kPi;

inline ComplexRaster random_raster(std::size_t n_az, std::size_t n_rg, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexRaster r(n_az, n_rg);
    for (auto& v : r.data()) v = {n(gen), n(gen)};
    return r;
}

// Direct O(N^2)-per-axis unitary DFT, sign -1 forward.
inline ComplexRaster direct_dft2(const ComplexRaster& x, int sign = -1) {
    const std::size_t R = x.n_az(), C = x.n_rg();
    ComplexRaster tmp(R, C), out(R, C, x.meta());
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t k = 0; k < C; ++k) {
            cplx acc = 0;
            for (std::size_t c = 0; c < C; ++c)
                acc += x(r, c) * std::polar(1.0, sign * 2.0 * kPi * double(k * c % C) / double(C));
            tmp(r, k) = acc / std::sqrt(double(C));
        }
    for (std::size_t k = 0; k < C; ++k)
        for (std::size_t q = 0; q < R; ++q) {
            cplx acc = 0;
            for (std::size_t r = 0; r < R; ++r)
                acc += tmp(r, k) * std::polar(1.0, sign * 2.0 * kPi * double(q * r % R) / double(R));
            out(q, k) = acc / std::sqrt(double(R));
        }
    return out;
}

inline double direct_energy(const ComplexRaster& x) {
    double e = 0;
    for (const auto& v : x.data()) e += v.real() * v.real() + v.imag() * v.imag();
    return e;
}

inline double max_abs_diff(const ComplexRaster& a, const ComplexRaster& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Small stripmap geometry: 0.625 m lines, 15 m range cells, 160-line aperture.
inline mmsar::AcquisitionMeta small_meta() {
    mmsar::AcquisitionMeta m;
    m.prf = 160;
    m.fs_rg = 10e6;
    m.wavelength = 0.031;
    m.v_p = 100;
    m.L = 100;
    m.incidence = 0.5;
    m.gamma = kPi / 2;
    m.near_range = 5000;
    return m;
}

inline mmsar::sim::SceneDefinition small_scene(std::vector<mmsar::sim::Scatterer> scatterers, double noise = 0) {
    mmsar::sim::SceneDefinition s;
    s.meta = small_meta();
    s.extent_rg = 960;
    s.extent_az = 160;
    s.chirp_bandwidth = 4e6;
    s.chirp_duration = 2e-6;
    s.scatterers = std::move(scatterers);
    s.noise_sigma = noise;
    return s;
}

inline mmsar::sim::Scatterer point(double pos_rg, double pos_az, double rcs = 1) {
    mmsar::sim::Scatterer s;
    s.pos_rg = pos_rg;
    s.pos_az = pos_az;
    s.rcs_amp = rcs;
    return s;
}

// Row/col of the largest magnitude sample.
inline std::pair<std::size_t, std::size_t> argmax(const ComplexRaster& img) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < img.size(); ++i)
        if (std::abs(img.data()[i]) > std::abs(img.data()[best])) best = i;
    return {best / img.n_rg(), best % img.n_rg()};
}

// Parabolic sub-sample peak of |img| along both axes around the argmax.
inline std::array<double, 2> peak_position(const ComplexRaster& img) {
    const auto [r, c] = argmax(img);
    auto refine = [](double a, double b, double d) {
        const double den = a - 2 * b + d;
        return den == 0 ? 0.0 : 0.5 * (a - d) / den;
    };
    const auto at = [&](std::ptrdiff_t rr, std::ptrdiff_t cc) {
        rr = (rr + std::ptrdiff_t(img.n_az())) % std::ptrdiff_t(img.n_az());
        cc = (cc + std::ptrdiff_t(img.n_rg())) % std::ptrdiff_t(img.n_rg());
        return std::abs(img(std::size_t(rr), std::size_t(cc)));
    };
    const auto R = std::ptrdiff_t(r), C = std::ptrdiff_t(c);
    return {double(r) + refine(at(R - 1, C), at(R, C), at(R + 1, C)),
            double(c) + refine(at(R, C - 1), at(R, C), at(R, C + 1))};
}

// Demo-scale scene: 21 scatterers on a diagonal line, 1024 x 96 raster.
inline constexpr std::size_t kDemoRows = 1024, kDemoCols = 96;

inline mmsar::sim::SceneDefinition line_scene(double noise = 0) {
    mmsar::sim::SceneDefinition s;
    s.meta = small_meta();
    s.extent_rg = 1400;
    s.extent_az = 640;
    s.chirp_bandwidth = 4e6;
    s.chirp_duration = 2e-6;
    s.noise_sigma = noise;
    for (int i = 0; i < 21; ++i) s.scatterers.push_back(point(5060 + 45.0 * i, 60 + 25.0 * i));
    return s;
}

inline mmsar::FrequencyPlan demo_plan(const mmsar::AcquisitionMeta& meta) {
    return mmsar::subap::make_plan(meta, {kDemoRows, kDemoCols}, 16, 0.5, mmsar::Taper::Hann, 110);
}

inline mmsar::coreg::CoregConfig demo_coreg() {
    mmsar::coreg::CoregConfig c;
    c.n_points = 100;
    c.window_az = 32;
    c.window_rg = 8;
    c.skimming = 1;
    c.min_separation_az = 24;
    c.min_separation_rg = 4;
    c.min_relative_amplitude = 0.5;
    return c;
}

// Range-direction harmonic whose Doppler-induced azimuth shift peaks at amp_px.
inline void make_vibrating(mmsar::sim::SceneDefinition& sc, std::size_t index, double f0, double amp_px,
                           double phase) {
    auto& s = sc.scatterers.at(index);
    mmsar::sim::Harmonic h;
    h.freq = f0;
    h.amp = amp_px * sc.meta.azimuth_spacing() * sc.meta.v_p / (s.pos_rg * 2 * kPi * f0);
    h.phase = phase;
    h.direction = {1, 0};
    s.harmonics = {h};
}

}  // namespace fixtures

#endif
