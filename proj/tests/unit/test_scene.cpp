#include <cmath>
#include <complex>

#include "doctest.h"
#include "fixtures.hpp"
#include "mmsar/error.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/scene.hpp"
#include "mmsar/subaperture.hpp"

using namespace mmsar;
using fixtures::point;
using fixtures::small_scene;

namespace {

constexpr std::size_t kRows = 256, kCols = 64;

double peak_power(const ComplexRaster& img) {
    const auto [r, c] = fixtures::argmax(img);
    return std::norm(img(r, c));
}

// Along-track position of the scatterer in the upper and lower Doppler half looks.
std::array<double, 2> half_look_positions(const sim::SceneDefinition& sc) {
    const auto raw = sim::simulate_raw(sc, kRows, kCols, 0);
    const auto plan = subap::make_plan(raw.meta(), raw.shape(), 2, 0.0);
    const auto stack = subap::decompose(raw, plan);
    std::array<double, 2> x{};
    for (std::size_t i = 0; i < 2; ++i)
        x[stack.band_index[i]] = fixtures::peak_position(stack.images[i])[0] * sc.meta.azimuth_spacing();
    return {x[0], x[1]};
}

}  // namespace

TEST_CASE("empty scene without noise is all zero") {
    const auto raw = sim::simulate_raw(small_scene({}), 32, 16, 5);
    for (const auto& v : raw.data()) CHECK(v == cplx{});
}

TEST_CASE("static scatterer focuses on its scene pixel") {
    const auto sc = small_scene({point(5450, 80)});
    const auto img = focus::focus(sim::simulate_raw(sc, kRows, kCols));
    const auto expect = sim::focused_position(sc, sc.scatterers[0]);
    const auto got = fixtures::peak_position(img);
    CHECK(std::abs(got[0] - expect[0]) <= 0.5);
    CHECK(std::abs(got[1] - expect[1]) <= 0.5);
}

TEST_CASE("azimuth harmonic smears the focused response by the defocus length 2Lv_x/(v_p sin gamma)") {
    // slow harmonic timed so v_x peaks at the beam-centre crossing
    const double f0 = 0.1, vx = 2.0;
    auto sc = small_scene({point(5450, 80)});
    const double t_bc = sim::beam_centre_time(sc, sc.scatterers[0]);
    sim::Harmonic h;
    h.freq = f0;
    h.amp = vx / (2 * kPi * f0);
    h.phase = -2 * kPi * f0 * t_bc;
    h.direction = {0, 1};
    sc.scatterers[0].harmonics = {h};
    CHECK(sim::velocity(sc.scatterers[0], t_bc)[1] == doctest::Approx(vx));

    const double dR = 2 * sc.meta.L * vx / (sc.meta.v_p * std::sin(sc.meta.gamma));
    const auto [x_lo, x_hi] = half_look_positions(sc);
    const double smear = 2 * (x_lo - x_hi);
    CHECK(smear > 0);
    CHECK(std::abs(smear - dR) <= 0.25 * dR);

    auto still = small_scene({point(5450, 80)});
    const auto [s_lo, s_hi] = half_look_positions(still);
    CHECK(std::abs(s_lo - s_hi) < 0.1 * sc.meta.azimuth_spacing());
}

TEST_CASE("raw synthesis is linear in the scatterer set") {
    const auto a = small_scene({point(5300, 70), point(5600, 95, 0.7)});
    const auto b = small_scene({point(5450, 80, 1.3)});
    auto both = a;
    both.scatterers.push_back(b.scatterers[0]);
    const auto ra = sim::simulate_raw(a, kRows, kCols), rb = sim::simulate_raw(b, kRows, kCols);
    const auto rab = sim::simulate_raw(both, kRows, kCols);
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < rab.size(); ++i) {
        err += std::norm(rab.data()[i] - ra.data()[i] - rb.data()[i]);
        ref += std::norm(rab.data()[i]);
    }
    CHECK(std::sqrt(err / ref) < 1e-10);
}

TEST_CASE("doubling rcs quadruples the focused peak power") {
    const double p1 = peak_power(focus::focus(sim::simulate_raw(small_scene({point(5450, 80, 1)}), kRows, kCols)));
    const double p2 = peak_power(focus::focus(sim::simulate_raw(small_scene({point(5450, 80, 2)}), kRows, kCols)));
    CHECK(std::abs(p2 / p1 - 4) <= 0.04);
}

TEST_CASE("identical seed gives a bit-identical raster") {
    const auto sc = small_scene({point(5450, 80)}, 0.3);
    const auto a = sim::simulate_raw(sc, 64, 32, 42), b = sim::simulate_raw(sc, 64, 32, 42);
    const auto c = sim::simulate_raw(sc, 64, 32, 43);
    CHECK(a.data() == b.data());
    CHECK(a.data() != c.data());
}

TEST_CASE("scatterer leaving the extent names its index") {
    auto sc = small_scene({point(5450, 80), point(5450, 150)});
    sim::Harmonic h;
    h.freq = 1;
    h.amp = 20;
    h.direction = {0, 1};
    sc.scatterers[1].harmonics = {h};
    try {
        sim::simulate_raw(sc, 64, 32);
        FAIL("expected SimulationBounds");
    } catch (const SimulationBounds& e) {
        CHECK(std::string(e.what()).find("scatterer 1") != std::string::npos);
    }
}

TEST_CASE("scene JSON round trip") {
    auto sc = small_scene({point(5450, 80, 0.5)}, 0.2);
    sim::Harmonic h;
    h.freq = 2;
    h.amp = 0.01;
    h.phase = 0.3;
    h.direction = {0.6, 0.8};
    sc.scatterers[0].harmonics = {h};
    sc.scatterers[0].velocity_rg = 0.1;
    const auto back = sim::scene_from_json(sim::scene_to_json(sc));
    CHECK(sim::scene_to_json(back) == sim::scene_to_json(sc));
    CHECK(back.scatterers[0].harmonics[0].direction[1] == 0.8);
}

namespace {

FrequencyPlan demo_plan() {
    return subap::make_plan(fixtures::small_meta(), {1024, 96}, 16, 0.5, Taper::Hann, 110);
}

}  // namespace

TEST_CASE("zero-amplitude harmonics give zero ground truth") {
    auto sc = small_scene({point(5450, 80)});
    sc.extent_az = 640;
    sim::Harmonic h;
    h.freq = 3;
    h.amp = 0;
    sc.scatterers[0].harmonics = {h};
    const auto gt = sim::ground_truth_offsets(sc, demo_plan());
    for (const auto& s : gt[0].samples) {
        CHECK(s.d_rg == 0.0);
        CHECK(s.d_az == 0.0);
    }
}

TEST_CASE("short windows sample the harmonic at its full amplitude") {
    const auto plan = demo_plan();
    const double f0 = 0.5;
    REQUIRE(plan.window_duration() < 0.1 / f0);
    auto sc = small_scene({point(5450, 300)});
    sc.extent_az = 640;
    sim::Harmonic h;
    h.freq = f0;
    h.amp = 0.3;
    h.phase = 0.4;
    h.direction = {0.6, 0.8};
    sc.scatterers[0].harmonics = {h};
    const auto gt = sim::ground_truth_offsets(sc, plan)[0];
    const double t_bc = sim::beam_centre_time(sc, sc.scatterers[0]);
    const double rate = subap::doppler_rate(sc.meta, sc.scatterers[0].pos_rg);
    for (std::size_t i = 0; i < gt.samples.size(); ++i) {
        const double t = t_bc + (plan.centers[gt.band_index[i]] - plan.doppler_center) / rate;
        const double u = h.amp * std::sin(2 * kPi * f0 * t + h.phase);
        const double amp_az = h.amp * 0.8 / sc.meta.azimuth_spacing();
        const double amp_rg = h.amp * 0.6 / sc.meta.range_spacing();
        CHECK(std::abs(gt.samples[i].d_az - u * 0.8 / sc.meta.azimuth_spacing()) <= 0.02 * amp_az);
        CHECK(std::abs(gt.samples[i].d_rg - u * 0.6 / sc.meta.range_spacing()) <= 0.02 * amp_rg);
    }
    for (std::size_t i = 1; i < gt.epochs.size(); ++i) CHECK(gt.epochs[i] > gt.epochs[i - 1]);
}

TEST_CASE("each scatterer's offsets peak at its own frequency bin") {
    const auto plan = demo_plan();
    const std::size_t n = plan.n_bands;
    const double df = 1.0 / (double(n) * plan.epoch_spacing());
    auto sc = small_scene({point(5450, 250), point(5600, 400)});
    sc.extent_az = 640;
    const std::size_t bins[2] = {2, 5};
    for (int i = 0; i < 2; ++i) {
        sim::Harmonic h;
        h.freq = double(bins[i]) * df;
        h.amp = 0.05;
        h.direction = {0, 1};
        sc.scatterers[std::size_t(i)].harmonics = {h};
    }
    const auto gt = sim::ground_truth_offsets(sc, plan);
    for (int i = 0; i < 2; ++i) {
        // direct DFT of the azimuth series, positive bins
        std::size_t best = 0;
        double best_mag = -1;
        for (std::size_t k = 1; k <= n / 2; ++k) {
            cplx acc = 0;
            for (std::size_t t = 0; t < n; ++t)
                acc += gt[std::size_t(i)].samples[t].d_az * std::polar(1.0, -2 * kPi * double(k * t) / double(n));
            if (std::abs(acc) > best_mag) {
                best_mag = std::abs(acc);
                best = k;
            }
        }
        CHECK(best == bins[i]);
    }
}
