#include "mmsar/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "mmsar/error.hpp"
#include "mmsar/parallel.hpp"
#include "mmsar/raster_io.hpp"

namespace mmsar::sim {
namespace {

double wrap_frequency(double f, double prf) {
    double w = std::fmod(f + prf / 2, prf);
    if (w < 0) w += prf;
    return w - prf / 2;
}

double cot(double a) { return std::cos(a) / std::sin(a); }

// Largest and smallest slant range seen across the illuminated span.
double range_migration(const AcquisitionMeta& meta, double r0) {
    const double centre = -r0 * cot(meta.gamma);
    const double half = meta.illuminated_span() / 2;
    const double a = centre - half, b = centre + half;
    const double far = std::max(std::hypot(r0, a), std::hypot(r0, b));
    const double near = (a <= 0 && b >= 0) ? r0 : std::min(std::hypot(r0, a), std::hypot(r0, b));
    return far - near;
}

template <typename F>
std::array<double, 2> window_mean(const Scatterer& s, double t0, double t1, F&& value) {
    constexpr int kNodes = 256;
    std::array<double, 2> acc{0, 0};
    for (int i = 0; i < kNodes; ++i) {
        const double t = t0 + (t1 - t0) * (i + 0.5) / kNodes;
        const auto v = value(s, t);
        acc[0] += v[0];
        acc[1] += v[1];
    }
    return {acc[0] / kNodes, acc[1] / kNodes};
}

template <typename F>
std::vector<OffsetSeries> sample_offsets(const SceneDefinition& scene, const FrequencyPlan& plan, F&& value) {
    plan.validate();
    const auto& meta = scene.meta;
    std::vector<std::size_t> order(plan.n_bands);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return plan.epoch_times[a] < plan.epoch_times[b]; });

    std::vector<OffsetSeries> out;
    out.reserve(scene.scatterers.size());
    for (std::size_t i = 0; i < scene.scatterers.size(); ++i) {
        const auto& s = scene.scatterers[i];
        const auto pos = focused_position(scene, s);
        OffsetSeries series;
        series.point_id = i;
        series.pixel = {std::lround(pos[0]), std::lround(pos[1])};
        const double rate = subap::doppler_rate(meta, s.pos_rg);
        const double t_bc = beam_centre_time(scene, s);
        const double duration = plan.bandwidth / std::abs(rate);
        // a band only sees the part of its slow-time window that is illuminated
        const double lit = meta.illuminated_span() / (2.0 * meta.v_p);
        for (std::size_t band : order) {
            const double t = t_bc + (plan.centers[band] - plan.doppler_center) / rate;
            double t0 = std::max(t - duration / 2, t_bc - lit);
            double t1 = std::min(t + duration / 2, t_bc + lit);
            if (t1 <= t0) t0 = t1 = t;
            const auto m = window_mean(s, t0, t1, value);
            series.band_index.push_back(band);
            series.epochs.push_back(plan.epoch_times[band]);
            series.samples.push_back(
                OffsetSample::from(m[0] / meta.range_spacing(), m[1] / meta.azimuth_spacing(), 1.0));
        }
        out.push_back(std::move(series));
    }
    return out;
}

}  // namespace

void SceneDefinition::validate() const {
    meta.validate();
    if (!(extent_rg > 0) || !(extent_az > 0)) throw InvalidInput("scene extents must be positive");
    if (!(chirp_bandwidth > 0) || !(chirp_duration > 0)) throw InvalidChirp("scene chirp must be positive");
    if (chirp_bandwidth > meta.fs_rg) throw InvalidChirp("chirp bandwidth exceeds fs_rg");
    if (!(noise_sigma >= 0)) throw InvalidInput("noise_sigma must be >= 0");
    for (std::size_t i = 0; i < scatterers.size(); ++i) {
        const auto& s = scatterers[i];
        if (!(s.rcs_amp >= 0)) throw InvalidInput("scatterer " + std::to_string(i) + ": rcs_amp must be >= 0");
        for (const auto& h : s.harmonics) {
            if (!(h.freq >= 0) || !(h.amp >= 0))
                throw InvalidInput("scatterer " + std::to_string(i) + ": harmonic freq and amp must be >= 0");
            if (std::abs(std::hypot(h.direction[0], h.direction[1]) - 1.0) > 1e-9)
                throw InvalidInput("scatterer " + std::to_string(i) + ": harmonic direction must be a unit vector");
        }
    }
}

std::array<double, 2> displacement(const Scatterer& s, double t) {
    std::array<double, 2> u{s.velocity_rg * t, s.velocity_az * t};
    for (const auto& h : s.harmonics) {
        const double v = h.amp * std::sin(2.0 * kPi * h.freq * t + h.phase);
        u[0] += v * h.direction[0];
        u[1] += v * h.direction[1];
    }
    return u;
}

std::array<double, 2> velocity(const Scatterer& s, double t) {
    std::array<double, 2> v{s.velocity_rg, s.velocity_az};
    for (const auto& h : s.harmonics) {
        const double w = 2.0 * kPi * h.freq;
        const double d = h.amp * w * std::cos(w * t + h.phase);
        v[0] += d * h.direction[0];
        v[1] += d * h.direction[1];
    }
    return v;
}

std::array<double, 2> focused_position(const SceneDefinition& scene, const Scatterer& s) {
    const auto& m = scene.meta;
    return {(s.pos_az / m.v_p - m.t_start) * m.prf, (s.pos_rg - m.near_range) / m.range_spacing()};
}

double beam_centre_time(const SceneDefinition& scene, const Scatterer& s) {
    return (s.pos_az - s.pos_rg * cot(scene.meta.gamma)) / scene.meta.v_p;
}

ComplexRaster simulate_raw(const SceneDefinition& scene, std::size_t n_az, std::size_t n_rg, std::uint64_t seed) {
    scene.validate();
    AcquisitionMeta meta = scene.meta;
    meta.chirp_bandwidth = scene.chirp_bandwidth;
    meta.chirp_duration = scene.chirp_duration;
    meta.doppler_center = wrap_frequency(2.0 * meta.v_p * std::cos(meta.gamma) / meta.wavelength, meta.prf);
    ComplexRaster raw(n_az, n_rg, meta);

    const double dr = meta.range_spacing();
    for (std::size_t i = 0; i < scene.scatterers.size(); ++i) {
        const double mig = range_migration(meta, scene.scatterers[i].pos_rg);
        if (mig >= 0.5 * dr)
            throw InvalidInput("scatterer " + std::to_string(i) + ": range migration " + std::to_string(mig) +
                               " m is not below half a range cell (" + std::to_string(0.5 * dr) + " m)");
    }
    const double rg_lo = meta.near_range, rg_hi = meta.near_range + scene.extent_rg;
    for (std::size_t i = 0; i < scene.scatterers.size(); ++i) {
        const auto& s = scene.scatterers[i];
        for (std::size_t line = 0; line < n_az; ++line) {
            const double t = meta.t_start + static_cast<double>(line) / meta.prf;
            const auto u = displacement(s, t);
            const double r = s.pos_rg + u[0], x = s.pos_az + u[1];
            if (r < rg_lo || r > rg_hi || x < 0 || x > scene.extent_az)
                throw SimulationBounds(i, "position (" + std::to_string(r) + " m, " + std::to_string(x) +
                                              " m) leaves the scene extent at t = " + std::to_string(t) + " s");
        }
    }

    const double span = meta.illuminated_span();
    const double cot_g = cot(meta.gamma);
    const double rate = scene.chirp_bandwidth / scene.chirp_duration;
    const double tau0 = 2.0 * meta.near_range / kSpeedOfLight;
    parallel_for(n_az, [&](std::size_t line) {
        const double t = meta.t_start + static_cast<double>(line) / meta.prf;
        const double xp = meta.v_p * t;
        auto row = raw.row(line);
        for (const auto& s : scene.scatterers) {
            if (s.rcs_amp == 0) continue;
            const auto u = displacement(s, t);
            const double r0 = s.pos_rg + u[0];
            const double xs = s.pos_az + u[1];
            if (std::abs(xp - (xs - r0 * cot_g)) > span / 2) continue;
            const double range = std::hypot(r0, xs - xp);
            const double delay = 2.0 * range / kSpeedOfLight - tau0;
            const cplx carrier = std::polar(s.rcs_amp, -4.0 * kPi * range / meta.wavelength);
            const auto first = static_cast<std::ptrdiff_t>(std::ceil(delay * meta.fs_rg));
            const auto last = static_cast<std::ptrdiff_t>(std::ceil((delay + scene.chirp_duration) * meta.fs_rg)) - 1;
            for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(first, 0);
                 j <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(n_rg) - 1); ++j) {
                const double tt = static_cast<double>(j) / meta.fs_rg - delay;
                if (tt < 0 || tt >= scene.chirp_duration) continue;
                const double tc = tt - scene.chirp_duration / 2;
                row[static_cast<std::size_t>(j)] += carrier * std::polar(1.0, kPi * rate * tc * tc);
            }
        }
        if (scene.noise_sigma > 0) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(line), 0x6d6d7372u};
            std::mt19937_64 gen(seq);
            std::normal_distribution<double> normal(0.0, scene.noise_sigma / std::sqrt(2.0));
            for (auto& v : row) {
                const double re = normal(gen);
                const double im = normal(gen);
                v += cplx{re, im};
            }
        }
    });
    return raw;
}

std::vector<OffsetSeries> ground_truth_offsets(const SceneDefinition& scene, const FrequencyPlan& plan) {
    return sample_offsets(scene, plan, [](const Scatterer& s, double t) { return displacement(s, t); });
}

std::vector<OffsetSeries> apparent_offsets(const SceneDefinition& scene, const FrequencyPlan& plan) {
    const double vp = scene.meta.v_p;
    return sample_offsets(scene, plan, [vp](const Scatterer& s, double t) {
        const auto u = displacement(s, t);
        const auto v = velocity(s, t);
        const double dx = s.pos_az + u[1] - vp * t;
        const double r = s.pos_rg + u[0];
        return std::array<double, 2>{u[0], u[1] - dx * v[1] / vp - r * v[0] / vp};
    });
}

SceneDefinition scene_from_json(const nlohmann::json& j) {
    SceneDefinition sc;
    try {
        sc.meta = meta_from_json(j.at("meta"));
        sc.extent_rg = j.at("extent_rg").get<double>();
        sc.extent_az = j.at("extent_az").get<double>();
        sc.chirp_bandwidth = j.at("chirp_bandwidth").get<double>();
        sc.chirp_duration = j.at("chirp_duration").get<double>();
        sc.noise_sigma = j.value("noise_sigma", 0.0);
        for (const auto& js : j.at("scatterers")) {
            Scatterer s;
            s.pos_rg = js.at("pos_rg").get<double>();
            s.pos_az = js.at("pos_az").get<double>();
            s.rcs_amp = js.value("rcs_amp", 1.0);
            s.velocity_rg = js.value("velocity_rg", 0.0);
            s.velocity_az = js.value("velocity_az", 0.0);
            for (const auto& jh : js.value("harmonics", nlohmann::json::array())) {
                Harmonic h;
                h.freq = jh.at("freq").get<double>();
                h.amp = jh.at("amp").get<double>();
                h.phase = jh.value("phase", 0.0);
                const auto d = jh.value("direction", std::vector<double>{1.0, 0.0});
                if (d.size() != 2) throw FormatError("harmonic direction must have two components");
                h.direction = {d[0], d[1]};
                s.harmonics.push_back(h);
            }
            sc.scatterers.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("scene definition: ") + e.what());
    }
    return sc;
}

nlohmann::json scene_to_json(const SceneDefinition& sc) {
    nlohmann::json scat = nlohmann::json::array();
    for (const auto& s : sc.scatterers) {
        nlohmann::json hs = nlohmann::json::array();
        for (const auto& h : s.harmonics)
            hs.push_back({{"freq", h.freq}, {"amp", h.amp}, {"phase", h.phase}, {"direction", h.direction}});
        scat.push_back({{"pos_rg", s.pos_rg},
                        {"pos_az", s.pos_az},
                        {"rcs_amp", s.rcs_amp},
                        {"velocity_rg", s.velocity_rg},
                        {"velocity_az", s.velocity_az},
                        {"harmonics", hs}});
    }
    return {{"meta", meta_to_json(sc.meta)},
            {"extent_rg", sc.extent_rg},
            {"extent_az", sc.extent_az},
            {"chirp_bandwidth", sc.chirp_bandwidth},
            {"chirp_duration", sc.chirp_duration},
            {"noise_sigma", sc.noise_sigma},
            {"scatterers", scat}};
}

SceneDefinition load_scene(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open scene file: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("scene file " + path.string() + ": " + e.what());
    }
    return scene_from_json(j);
}

}  // namespace mmsar::sim
