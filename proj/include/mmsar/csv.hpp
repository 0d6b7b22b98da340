#ifndef MMSAR_CSV_HPP
#define MMSAR_CSV_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmsar/modal.hpp"
#include "mmsar/offsets.hpp"
#include "mmsar/psinsar.hpp"

namespace mmsar::io {

/// Header plus rows of unquoted comma-separated fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; FormatError when absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, std::size_t col) const;
    std::size_t count(std::size_t row, std::size_t col) const;
    std::ptrdiff_t integer(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

// offsets.csv: point_id,row,col,band_index,epoch_s,d_rg_px,d_az_px,peak_corr,valid
void write_offsets(const std::filesystem::path& path, const std::vector<OffsetSeries>& series);
std::vector<OffsetSeries> read_offsets(const std::filesystem::path& path);

// vibmap.csv: point_id,row,col,energy,dominant_freq_hz (empty when none)
struct VibmapRecord {
    std::size_t point_id = 0;
    PixelCoord pixel;
    double energy = 0;
    std::optional<double> dominant_freq;
    bool operator==(const VibmapRecord&) const = default;
};
std::vector<VibmapRecord> vibmap_records(const modal::VibrationMap& map);
void write_vibmap(const std::filesystem::path& path, const modal::VibrationMap& map);
std::vector<VibmapRecord> read_vibmap(const std::filesystem::path& path);

// anomalies.csv: point_id,row,col,energy,z_score,dominant_freq_hz
void write_anomalies(const std::filesystem::path& path, const modal::AnomalyReport& report);
std::vector<modal::Anomaly> read_anomalies(const std::filesystem::path& path);

// ps.csv, one line per PS and epoch:
// ps_id,row,col,lat_deg,lon_deg,d_a,reliable,time_yr,disp_mm
struct PsTrack {
    std::size_t id = 0;
    PixelCoord pixel;
    psinsar::GeoPoint pos;
    double d_a = 0;
    bool reliable = true;
    std::vector<double> times_yr;
    std::vector<double> disp_mm;
};
void write_ps(const std::filesystem::path& path, const std::vector<PsTrack>& tracks);
std::vector<PsTrack> read_ps(const std::filesystem::path& path);

// kin.csv: ps_id,row,col,lat_deg,lon_deg,mean_velocity_mm_yr,mean_acceleration_mm_yr2
struct KinRecord {
    std::size_t id = 0;
    PixelCoord pixel;
    psinsar::GeoPoint pos;
    double mean_velocity = 0;
    double mean_acceleration = 0;
};
void write_kinematics(const std::filesystem::path& path, const std::vector<KinRecord>& rows);
std::vector<KinRecord> read_kinematics(const std::filesystem::path& path);

// kinematics series: ps_id,quantity,index,value
// quantity is one of displacement, velocity, acceleration, jerk
void write_kinematics_series(const std::filesystem::path& path, const std::vector<std::size_t>& ids,
                             const std::vector<psinsar::KinematicsRow>& rows);

// gnss.csv: lat_deg,lon_deg,vel_mm_yr
std::vector<psinsar::GnssRecord> read_gnss(const std::filesystem::path& path);
void write_gnss(const std::filesystem::path& path, const std::vector<psinsar::GnssRecord>& records);

}  // namespace mmsar::io

#endif
