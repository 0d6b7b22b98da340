#ifndef MMSAR_SCENE_HPP
#define MMSAR_SCENE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "mmsar/offsets.hpp"
#include "mmsar/raster.hpp"
#include "mmsar/subaperture.hpp"

namespace mmsar::sim {

/// Sinusoidal displacement amp*sin(2*pi*freq*t + phase) along `direction`,
/// a unit vector in the (slant range, azimuth) plane.
struct Harmonic {
    double freq = 0;
    double amp = 0;
    double phase = 0;
    std::array<double, 2> direction{1.0, 0.0};
};

struct Scatterer {
    double pos_rg = 0;   // m, slant range of closest approach
    double pos_az = 0;   // m, along-track
    double rcs_amp = 1;
    std::vector<Harmonic> harmonics;
    // constant drift (m/s), zero displacement at t = 0
    double velocity_rg = 0;
    double velocity_az = 0;
};

struct SceneDefinition {
    AcquisitionMeta meta;
    double extent_rg = 0;  // m, slant range covered from meta.near_range
    double extent_az = 0;  // m, along-track covered from 0
    double chirp_bandwidth = 0;
    double chirp_duration = 0;
    std::vector<Scatterer> scatterers;
    double noise_sigma = 0;

    void validate() const;
};

/// (range, azimuth) displacement in metres at slow time t.
std::array<double, 2> displacement(const Scatterer& s, double t);
/// (range, azimuth) velocity in m/s at slow time t.
std::array<double, 2> velocity(const Scatterer& s, double t);

/// Raw echoes for n_az lines of n_rg samples. Stop-and-go, straight orbit,
/// rectangular beam of along-track width L/sin(gamma) squinted by gamma.
/// The noise stream is keyed on (seed, line) so output does not depend on
/// the thread count.
ComplexRaster simulate_raw(const SceneDefinition& scene, std::size_t n_az, std::size_t n_rg, std::uint64_t seed = 0);

/// Pixel where a static scatterer focuses: (row, col) as fractional pixels.
std::array<double, 2> focused_position(const SceneDefinition& scene, const Scatterer& s);

/// Slow time at which the beam centre crosses the scatterer.
double beam_centre_time(const SceneDefinition& scene, const Scatterer& s);

/// Window-mean physical displacement of every scatterer per sub-aperture, in
/// pixels, ordered by epoch. Samples are absolute (not relative to a master).
std::vector<OffsetSeries> ground_truth_offsets(const SceneDefinition& scene, const FrequencyPlan& plan);

/// Window-mean image-domain offsets the tracker should observe: physical
/// displacement plus the azimuth position error a moving target picks up
/// through its Doppler history (-dx*v_az/v_p - r*v_rg/v_p).
std::vector<OffsetSeries> apparent_offsets(const SceneDefinition& scene, const FrequencyPlan& plan);

SceneDefinition scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const SceneDefinition& scene);
SceneDefinition load_scene(const std::filesystem::path& path);

}  // namespace mmsar::sim

#endif
