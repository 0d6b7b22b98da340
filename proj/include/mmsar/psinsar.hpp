#ifndef MMSAR_PSINSAR_HPP
#define MMSAR_PSINSAR_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmsar/raster.hpp"
#include "mmsar/spectral.hpp"

namespace mmsar::psinsar {

// ---- amplitude statistics ----

/// exp(-|x|) I0(x) and exp(-|x|) I1(x), stable for large x.
double bessel_i0e(double x);
double bessel_i1e(double x);

/// Rice density of amplitude a. Throws DomainError on a < 0, nu < 0 or sigma <= 0.
double rice_pdf(double a, double nu, double sigma);

struct RiceFit {
    double nu = 0;
    double sigma = 0;
    double d_a = 0;           // sigma / nu; infinite when nu == 0
    bool degenerate = false;  // zero sample variance, sigma forced to 0
    bool unstable = false;    // nu == 0: no dominant scatterer
    std::size_t iterations = 0;
};

/// Moment estimate refined by at most 20 fixed-point iterations.
/// Needs at least 8 non-negative samples.
RiceFit fit_rice(std::span<const double> amplitudes);

// ---- stacks and PS selection ----

struct SlcStack {
    std::vector<ComplexRaster> images;
    std::vector<double> times_days;  // strictly increasing
    std::size_t master_index = 0;

    void validate() const;
    /// Temporally central image.
    static std::size_t central_master(std::size_t n_images) { return n_images / 2; }
};

enum class StabilityMode {
    Dispersion,        // select d_a <= threshold
    InverseStability,  // select 1 / (1 + d_a) >= threshold
};

struct PsConfig {
    double threshold = 0.8;
    StabilityMode mode = StabilityMode::InverseStability;
};

struct PsPoint {
    std::size_t id = 0;
    PixelCoord pixel;
    RiceFit fit;
};

double stability(const RiceFit& fit, StabilityMode mode);
bool passes(const RiceFit& fit, const PsConfig& cfg);

/// Per-pixel Rice fit across the stack; degenerate fits are never selected.
/// Ids follow row-major pixel order.
std::vector<PsPoint> select_ps(const SlcStack& stack, const PsConfig& cfg = {});

// ---- phase model ----

/// Geometry of one slave relative to the master.
struct PairGeometry {
    double b_perp = 0;     // m
    double incidence = 0;  // rad
    double alpha = 0;      // rad, master-slave inclination; carried, not used
};

/// Flat-earth phase of a target at slant range rho against reference range rho0.
double flat_earth_phase(double wavelength, double b_perp, double rho, double rho0, double incidence);
/// Topographic phase of height h at slant range rho.
double topographic_phase(double wavelength, double b_perp, double rho, double incidence, double h);
/// Displacement phase of LOS motion delta (m, positive toward the sensor).
double displacement_phase(double wavelength, double delta);

double wrap_phase(double phi);

struct PhaseComponents {
    double observed = 0;  // wrapped interferometric phase
    double flat_earth = 0;
    double topographic = 0;
    double atmospheric = 0;
    double noise = 0;  // wrapped closure remainder
    double displacement = 0;
};

struct PhaseModelInput {
    /// Keyed by slave image index; every non-master image needs an entry.
    std::map<std::size_t, PairGeometry> geometry;
    /// Atmospheric phase screen per slave image index (rad); absent means zero.
    std::map<std::size_t, RealGrid> atmo;
    /// Terrain height per PS id (m); absent means zero.
    std::map<std::size_t, double> heights;
    /// Reference slant range for the flat-earth term; 0 means scene centre.
    double reference_range = 0;
};

inline constexpr double kUnwrapLimit = 0.9 * kPi;

struct PsSeries {
    std::size_t id = 0;
    PixelCoord pixel;
    RiceFit fit;
    std::vector<double> times_days;
    std::vector<double> displacement_mm;        // per image, master = 0
    std::vector<PhaseComponents> components;    // per image, master entry all zero
    bool reliable = true;                       // false when an epoch step exceeded kUnwrapLimit
};

std::vector<PsSeries> phase_model(const SlcStack& stack, const std::vector<PsPoint>& ps, const PhaseModelInput& in);

/// Least-squares slope of y against t.
double linear_rate(const std::vector<double>& t, const std::vector<double>& y);

// ---- kinematics ----

struct KinematicsRow {
    std::vector<double> displacement;  // mm
    std::vector<double> velocity;      // mm/yr
    std::vector<double> acceleration;  // mm/yr^2
    std::vector<double> jerk;          // mm/yr^3
    double mean_velocity = 0;          // least-squares rate, mm/yr
    double mean_acceleration = 0;
};

/// Repeated first differences, each on the midpoints of the previous grid.
/// Needs at least 4 strictly increasing epochs; repeated times throw DomainError.
KinematicsRow kinematics(const std::vector<double>& disp_mm, const std::vector<double>& times_yr);

// ---- acceleration inversion ----

struct ProfilePoint {
    std::size_t id = 0;
    double position = 0;  // along the profile, any unit
    double value = 0;     // mean acceleration
};

struct Crossing {
    std::size_t profile = 0;
    std::size_t left_index = 0;  // positions within the profile
    std::size_t right_index = 0;
    std::size_t left_id = 0;
    std::size_t right_id = 0;
    double fraction = 0;  // 0 at left, 1 at right
    double position = 0;
};

struct InversionResult {
    std::vector<Crossing> crossings;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    bool single_sign = false;
};

/// Sign changes of the value along each ordered profile. Exact zeros are
/// passed over; a crossing sits between the nonzero samples that flank it.
InversionResult find_inversion_lines(const std::vector<std::vector<ProfilePoint>>& profiles);

// ---- GNSS comparison ----

inline constexpr double kEarthRadius = 6371000.0;

struct GeoPoint {
    double lat_deg = 0;
    double lon_deg = 0;
};

double great_circle_distance(GeoPoint a, GeoPoint b);
/// NaN with fewer than two pairs or zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct PsVelocity {
    std::size_t id = 0;
    GeoPoint pos;
    double velocity = 0;  // mm/yr
};

struct GnssRecord {
    GeoPoint pos;
    double velocity = 0;  // mm/yr
};

struct GnssPair {
    std::size_t gnss_index = 0;
    std::size_t ps_id = 0;
    double distance_m = 0;
    double gnss_velocity = 0;
    double ps_velocity = 0;
};

struct ComparisonReport {
    std::vector<GnssPair> pairs;
    std::size_t skipped = 0;
    double correlation = 0;  // NaN when undefined
    double max_distance = 0;
};

/// Nearest PS within max_dist per GNSS record (ties go to the lower id).
ComparisonReport compare_gnss(const std::vector<PsVelocity>& ps, const std::vector<GnssRecord>& gnss,
                              double max_dist);

nlohmann::json report_to_json(const ComparisonReport& r);

}  // namespace mmsar::psinsar

#endif
