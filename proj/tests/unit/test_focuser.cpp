#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/scene.hpp"

using namespace mmsar;
using fixtures::point;
using fixtures::small_scene;

namespace {

constexpr std::size_t kRows = 256, kCols = 64;

ComplexRaster raw_of(const sim::SceneDefinition& sc, std::uint64_t seed = 0) {
    return sim::simulate_raw(sc, kRows, kCols, seed);
}

// |x| of one range line interpolated by `factor` through zero-padding.
std::vector<double> oversampled_profile(std::span<const cplx> line, std::size_t factor) {
    const std::size_t n = line.size(), m = n * factor;
    std::vector<cplx> spec(line.begin(), line.end()), wide(m);
    fft_inplace(spec, FftDirection::Forward);
    for (std::size_t k = 0; k < n / 2; ++k) wide[k] = spec[k];
    for (std::size_t k = n / 2 + 1; k < n; ++k) wide[m - (n - k)] = spec[k];
    fft_inplace(wide, FftDirection::Inverse);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = std::abs(wide[i]) / double(n);
    return out;
}

// Width (in original samples) between the -3 dB points around the maximum.
double width_3db(const std::vector<double>& p, std::size_t factor) {
    const auto top = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
    const double half = p[top] / std::sqrt(2.0);
    auto cross = [&](int dir) {
        std::ptrdiff_t i = std::ptrdiff_t(top);
        while (p[std::size_t(i + dir)] > half) i += dir;
        const double a = p[std::size_t(i)], b = p[std::size_t(i + dir)];
        return double(i) + dir * (a - half) / (a - b);
    };
    return (cross(+1) - cross(-1)) / double(factor);
}

// Peak-to-max-sidelobe ratio (dB) along one cut through the peak.
double pslr_db(const std::vector<double>& cut, std::size_t peak) {
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && cut[lo - 1] < cut[lo]) --lo;
    while (hi + 1 < cut.size() && cut[hi + 1] < cut[hi]) ++hi;
    double side = 0;
    for (std::size_t i = 0; i < cut.size(); ++i)
        if (i < lo || i > hi) side = std::max(side, cut[i]);
    return 20 * std::log10(cut[peak] / side);
}

}  // namespace

TEST_CASE("zero raw data focuses to zero") {
    ComplexRaster z(kRows, kCols, raw_of(small_scene({})).meta());
    const auto rc = focus::range_compress(z, 4e6, 2e-6);
    for (const auto& v : rc.data()) CHECK(v == cplx{});
    const auto slc = focus::focus(z);
    for (const auto& v : slc.data()) CHECK(v == cplx{});
}

TEST_CASE("range compression main lobe is about fs/B samples wide") {
    const auto sc = small_scene({point(5450, 80)});
    const auto rc = focus::range_compress(raw_of(sc), sc.chirp_bandwidth, sc.chirp_duration);
    const double expect = sc.meta.fs_rg / sc.chirp_bandwidth;
    const double w = width_3db(oversampled_profile(rc.row(128), 16), 16);
    CHECK(std::abs(w - expect) <= 0.2 * expect);
}

TEST_CASE("two separated echoes keep their amplitude ratio") {
    // different rows keep each echo clear of the other's range sidelobes
    const auto sc = small_scene({point(5300, 70, 1.0), point(5450, 90, 0.6)});
    const auto slc = focus::focus(raw_of(sc));
    const double a = std::abs(slc(112, 20)), b = std::abs(slc(144, 30));
    CHECK(a > 0.5);
    CHECK(std::abs(b / a - 0.6) <= 0.02 * 0.6);
}

TEST_CASE("static point target: position and sidelobes") {
    const auto sc = small_scene({point(5450, 80)});
    const auto slc = focus::focus(raw_of(sc));
    const auto [r, c] = fixtures::argmax(slc);
    const auto pos = fixtures::peak_position(slc);
    const auto expect = sim::focused_position(sc, sc.scatterers[0]);
    CHECK(std::abs(pos[0] - expect[0]) <= 0.5);
    CHECK(std::abs(pos[1] - expect[1]) <= 0.5);
    CHECK(std::abs(slc(r, c)) == doctest::Approx(1.0).epsilon(0.1));

    std::vector<double> az(kRows), rg(kCols);
    for (std::size_t i = 0; i < kRows; ++i) az[i] = std::abs(slc(i, c));
    for (std::size_t j = 0; j < kCols; ++j) rg[j] = std::abs(slc(r, j));
    CHECK(pslr_db(az, r) >= 10);
    CHECK(pslr_db(rg, c) >= 10);
}

TEST_CASE("focusing is linear") {
    const auto meta = raw_of(small_scene({})).meta();
    auto x = fixtures::random_raster(kRows, kCols, 1), y = fixtures::random_raster(kRows, kCols, 2);
    x.meta() = meta;
    y.meta() = meta;
    const cplx a(0.7, -0.2), b(-1.3, 0.5);
    ComplexRaster mix(kRows, kCols, meta);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
    const auto fm = focus::focus(mix), fx = focus::focus(x), fy = focus::focus(y);
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < fm.size(); ++i) {
        err += std::norm(fm.data()[i] - a * fx.data()[i] - b * fy.data()[i]);
        ref += std::norm(fm.data()[i]);
    }
    CHECK(std::sqrt(err / ref) < 1e-10);
}

TEST_CASE("peak position is stable under 10% noise") {
    const auto clean = small_scene({point(5450, 80)});
    const auto p0 = fixtures::peak_position(focus::focus(raw_of(clean)));
    const auto noisy = small_scene({point(5450, 80)}, 0.1);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto p = fixtures::peak_position(focus::focus(raw_of(noisy, seed)));
        CHECK(std::abs(p[0] - p0[0]) <= 0.1);
        CHECK(std::abs(p[1] - p0[1]) <= 0.1);
    }
}

TEST_CASE("constant azimuth velocity defocuses by 2Lv_x/(v_p sin gamma)") {
    for (double vx : {-2.0, 1.5}) {
        auto sc = small_scene({point(5450, 80)});
        sc.scatterers[0].velocity_az = vx;
        const auto slc = focus::focus(raw_of(sc));
        // looks from the lower and upper Doppler halves of the focused spectrum
        auto spec = slc;
        fft_cols(spec, FftDirection::Forward);
        auto lo = spec, hi = spec;
        for (std::size_t k = 0; k < kRows; ++k) {
            const double f = bin_frequency(k, kRows, sc.meta.prf);
            auto& drop = f < 0 ? hi : lo;
            for (auto& v : drop.row(k)) v = 0;
        }
        fft_cols(lo, FftDirection::Inverse);
        fft_cols(hi, FftDirection::Inverse);
        const double x_lo = fixtures::peak_position(lo)[0] * sc.meta.azimuth_spacing();
        const double x_hi = fixtures::peak_position(hi)[0] * sc.meta.azimuth_spacing();
        const double dR = 2 * sc.meta.L * vx / (sc.meta.v_p * std::sin(sc.meta.gamma));
        const double got = 2 * (x_lo - x_hi);
        CHECK(got * dR > 0);
        CHECK(std::abs(got - dR) <= 0.25 * std::abs(dR));
    }
}

TEST_CASE("focuser errors") {
    auto raw = raw_of(small_scene({}));
    CHECK_THROWS_AS(focus::range_compress(raw, 20e6, 2e-6), InvalidChirp);
    raw.meta().v_p = 0;
    CHECK_THROWS_AS(focus::azimuth_compress(raw), InvalidMeta);
}
