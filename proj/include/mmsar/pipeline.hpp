#ifndef MMSAR_PIPELINE_HPP
#define MMSAR_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmsar/coreg.hpp"
#include "mmsar/csv.hpp"
#include "mmsar/heatmap.hpp"
#include "mmsar/psinsar.hpp"
#include "mmsar/spectral.hpp"

namespace mmsar::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_bytes(const std::string& data);
/// Hex SHA-256 of a file; for a directory, of its sorted (name, digest) list.
std::string sha256_path(const std::filesystem::path& path);

// ---- PS-InSAR branch inputs ----

/// Affine pixel-to-geodetic annotation.
struct GeoTransform {
    double lat0 = 0, lon0 = 0;
    double dlat_row = 0, dlon_row = 0;
    double dlat_col = 0, dlon_col = 0;
    psinsar::GeoPoint operator()(PixelCoord p) const;
};

/// stack_list.json: images (paths relative to the file), times_days,
/// optional master_index, geometry [{image, b_perp, incidence, alpha}],
/// optional height_map raster, reference_range and geo transform.
struct StackList {
    std::vector<std::filesystem::path> images;
    std::vector<double> times_days;
    std::optional<std::size_t> master_index;
    std::map<std::size_t, psinsar::PairGeometry> geometry;
    std::optional<std::filesystem::path> height_map;
    double reference_range = 0;
    std::optional<GeoTransform> geo;
};

StackList load_stack_list(const std::filesystem::path& path);
nlohmann::json stack_list_to_json(const StackList& s);

/// Files the PS branch reads: the list, its images with sidecars, the height
/// map and any atmo_NNN.mmsr screens found in atmo_dir.
std::vector<std::filesystem::path> psinsar_inputs(const std::filesystem::path& stack_list,
                                                  const std::optional<std::filesystem::path>& atmo_dir);

/// Selects PS, runs the phase model and annotates coordinates. Screens are
/// read from atmo_dir/atmo_NNN.mmsr (real part, rad) where present.
std::vector<io::PsTrack> run_psinsar(const std::filesystem::path& stack_list,
                                     const std::optional<std::filesystem::path>& atmo_dir, const psinsar::PsConfig& cfg);

struct KinematicsTable {
    std::vector<io::KinRecord> summary;
    std::vector<std::size_t> ids;
    std::vector<psinsar::KinematicsRow> rows;
};

/// Kinematics of every reliable track with at least 4 epochs.
KinematicsTable kinematics_table(const std::vector<io::PsTrack>& tracks);

psinsar::ComparisonReport compare_from_kinematics(const std::vector<io::KinRecord>& kin,
                                                  const std::vector<psinsar::GnssRecord>& gnss, double max_dist);

psinsar::StabilityMode parse_stability_mode(const std::string& s);
Taper parse_taper(const std::string& s);
report::HeatScale parse_heat_scale(const std::string& s);

// ---- orchestration ----

struct PsinsarStageConfig {
    std::filesystem::path stack_list;
    std::optional<std::filesystem::path> atmo_dir;
    psinsar::PsConfig ps;
    std::optional<std::filesystem::path> gnss;
    double max_dist = 100;
};

struct PipelineConfig {
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> scene;  // simulate when set
    std::optional<std::filesystem::path> raw;    // otherwise an existing raw raster
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t seed = 0;

    std::size_t n_bands = 16;
    double overlap = 0.5;
    Taper taper = Taper::Rect;
    double processed_bandwidth = 0;

    coreg::CoregConfig coreg;

    double z_threshold = 3;
    std::size_t fit_order = 0;  // 0 skips the modal fit
    report::HeatScale heat_scale = report::HeatScale::Quantile;

    std::optional<PsinsarStageConfig> psinsar;

    /// Throws ConfigError on violated invariants (paths are checked per stage).
    void validate() const;
};

/// Relative paths resolve against base_dir. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

struct StageRecord {
    std::string name;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest
    std::string params_hash;
    double seconds = 0;
    bool skipped = false;  // this run only, not persisted
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::vector<StageRecord> stages;

    const StageRecord* find(const std::string& name) const;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// simulate (optional) -> focus -> subap -> track -> modal, then the PS
/// branch when configured. A stage is skipped when its input digests,
/// parameters and output digests match out_dir/manifest.json. Failures throw
/// StageError naming the stage; earlier outputs stay on disk.
RunManifest run_pipeline(const PipelineConfig& cfg);

}  // namespace mmsar::pipeline

#endif
