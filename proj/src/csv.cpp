#include "mmsar/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mmsar/error.hpp"

namespace mmsar::io {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) throw FormatError("not a number: '" + s + "'");
    return v;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
}

std::string fmt_count(std::size_t v) { return std::to_string(v); }
std::string fmt_int(std::ptrdiff_t v) { return std::to_string(v); }

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw FormatError("missing CSV column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const { return parse_double(rows.at(row).at(col)); }

std::ptrdiff_t CsvTable::integer(std::size_t row, std::size_t col) const {
    const std::string& s = rows.at(row).at(col);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("not an integer: '" + s + "'");
    return static_cast<std::ptrdiff_t>(v);
}

std::size_t CsvTable::count(std::size_t row, std::size_t col) const {
    const std::ptrdiff_t v = integer(row, col);
    if (v < 0) throw FormatError("negative count in CSV");
    return static_cast<std::size_t>(v);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != t.header.size())
            throw FormatError(path.string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    if (first) throw FormatError(path.string() + ": empty CSV");
    return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& f) {
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    if (!out) throw InvalidInput("write failed for " + path.string());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_offsets(const std::filesystem::path& path, const std::vector<OffsetSeries>& series) {
    CsvTable t;
    t.header = {"point_id", "row", "col", "band_index", "epoch_s", "d_rg_px", "d_az_px", "peak_corr", "valid"};
    for (const auto& s : series) {
        if (s.samples.size() != s.epochs.size() || s.band_index.size() != s.epochs.size())
            throw InvalidInput("offset series fields differ in length");
        for (std::size_t k = 0; k < s.samples.size(); ++k) {
            const auto& o = s.samples[k];
            t.rows.push_back({fmt_count(s.point_id), fmt_int(s.pixel.row), fmt_int(s.pixel.col),
                              fmt_count(s.band_index[k]), format_number(s.epochs[k]), format_number(o.d_rg),
                              format_number(o.d_az), format_number(o.peak_corr), o.valid ? "1" : "0"});
        }
    }
    write_csv(path, t);
}

std::vector<OffsetSeries> read_offsets(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("point_id"), c_row = t.column("row"), c_col = t.column("col"),
                      c_band = t.column("band_index"), c_ep = t.column("epoch_s"), c_rg = t.column("d_rg_px"),
                      c_az = t.column("d_az_px"), c_corr = t.column("peak_corr"), c_valid = t.column("valid");
    std::vector<OffsetSeries> out;
    std::map<std::size_t, std::size_t> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::size_t id = t.count(r, c_id);
        auto [it, fresh] = index.try_emplace(id, out.size());
        if (fresh) {
            OffsetSeries s;
            s.point_id = id;
            s.pixel = {t.integer(r, c_row), t.integer(r, c_col)};
            out.push_back(std::move(s));
        }
        OffsetSeries& s = out[it->second];
        s.band_index.push_back(t.count(r, c_band));
        s.epochs.push_back(t.number(r, c_ep));
        s.samples.push_back(OffsetSample::from(t.number(r, c_rg), t.number(r, c_az), t.number(r, c_corr),
                                               t.count(r, c_valid) != 0));
    }
    return out;
}

std::vector<VibmapRecord> vibmap_records(const modal::VibrationMap& map) {
    std::vector<VibmapRecord> out;
    for (const auto& p : map.points) out.push_back({p.point_id, p.pixel, p.energy, p.dominant_freq});
    return out;
}

void write_vibmap(const std::filesystem::path& path, const modal::VibrationMap& map) {
    CsvTable t;
    t.header = {"point_id", "row", "col", "energy", "dominant_freq_hz"};
    for (const auto& r : vibmap_records(map))
        t.rows.push_back({fmt_count(r.point_id), fmt_int(r.pixel.row), fmt_int(r.pixel.col), format_number(r.energy),
                          fmt_opt(r.dominant_freq)});
    write_csv(path, t);
}

std::vector<VibmapRecord> read_vibmap(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("point_id"), c_row = t.column("row"), c_col = t.column("col"),
                      c_e = t.column("energy"), c_f = t.column("dominant_freq_hz");
    std::vector<VibmapRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({t.count(r, c_id), {t.integer(r, c_row), t.integer(r, c_col)}, t.number(r, c_e),
                       parse_opt(t.rows[r][c_f])});
    return out;
}

void write_anomalies(const std::filesystem::path& path, const modal::AnomalyReport& report) {
    CsvTable t;
    t.header = {"point_id", "row", "col", "energy", "z_score", "dominant_freq_hz"};
    for (const auto& a : report.anomalies)
        t.rows.push_back({fmt_count(a.point_id), fmt_int(a.pixel.row), fmt_int(a.pixel.col), format_number(a.energy),
                          format_number(a.z_score), fmt_opt(a.dominant_freq)});
    write_csv(path, t);
}

std::vector<modal::Anomaly> read_anomalies(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("point_id"), c_row = t.column("row"), c_col = t.column("col"),
                      c_e = t.column("energy"), c_z = t.column("z_score"), c_f = t.column("dominant_freq_hz");
    std::vector<modal::Anomaly> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({t.count(r, c_id), {t.integer(r, c_row), t.integer(r, c_col)}, t.number(r, c_e),
                       t.number(r, c_z), parse_opt(t.rows[r][c_f])});
    return out;
}

void write_ps(const std::filesystem::path& path, const std::vector<PsTrack>& tracks) {
    CsvTable t;
    t.header = {"ps_id", "row", "col", "lat_deg", "lon_deg", "d_a", "reliable", "time_yr", "disp_mm"};
    for (const auto& p : tracks) {
        if (p.times_yr.size() != p.disp_mm.size()) throw InvalidInput("PS track fields differ in length");
        for (std::size_t k = 0; k < p.times_yr.size(); ++k)
            t.rows.push_back({fmt_count(p.id), fmt_int(p.pixel.row), fmt_int(p.pixel.col), format_number(p.pos.lat_deg),
                              format_number(p.pos.lon_deg), format_number(p.d_a), p.reliable ? "1" : "0",
                              format_number(p.times_yr[k]), format_number(p.disp_mm[k])});
    }
    write_csv(path, t);
}

std::vector<PsTrack> read_ps(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("ps_id"), c_row = t.column("row"), c_col = t.column("col"),
                      c_lat = t.column("lat_deg"), c_lon = t.column("lon_deg"), c_da = t.column("d_a"),
                      c_rel = t.column("reliable"), c_t = t.column("time_yr"), c_d = t.column("disp_mm");
    std::vector<PsTrack> out;
    std::map<std::size_t, std::size_t> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::size_t id = t.count(r, c_id);
        auto [it, fresh] = index.try_emplace(id, out.size());
        if (fresh) {
            PsTrack p;
            p.id = id;
            p.pixel = {t.integer(r, c_row), t.integer(r, c_col)};
            p.pos = {t.number(r, c_lat), t.number(r, c_lon)};
            p.d_a = t.number(r, c_da);
            p.reliable = t.count(r, c_rel) != 0;
            out.push_back(std::move(p));
        }
        PsTrack& p = out[it->second];
        p.times_yr.push_back(t.number(r, c_t));
        p.disp_mm.push_back(t.number(r, c_d));
    }
    return out;
}

void write_kinematics(const std::filesystem::path& path, const std::vector<KinRecord>& rows) {
    CsvTable t;
    t.header = {"ps_id", "row", "col", "lat_deg", "lon_deg", "mean_velocity_mm_yr", "mean_acceleration_mm_yr2"};
    for (const auto& k : rows)
        t.rows.push_back({fmt_count(k.id), fmt_int(k.pixel.row), fmt_int(k.pixel.col), format_number(k.pos.lat_deg),
                          format_number(k.pos.lon_deg), format_number(k.mean_velocity),
                          format_number(k.mean_acceleration)});
    write_csv(path, t);
}

std::vector<KinRecord> read_kinematics(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_id = t.column("ps_id"), c_row = t.column("row"), c_col = t.column("col"),
                      c_lat = t.column("lat_deg"), c_lon = t.column("lon_deg"), c_v = t.column("mean_velocity_mm_yr"),
                      c_a = t.column("mean_acceleration_mm_yr2");
    std::vector<KinRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({t.count(r, c_id), {t.integer(r, c_row), t.integer(r, c_col)},
                       {t.number(r, c_lat), t.number(r, c_lon)}, t.number(r, c_v), t.number(r, c_a)});
    return out;
}

void write_kinematics_series(const std::filesystem::path& path, const std::vector<std::size_t>& ids,
                             const std::vector<psinsar::KinematicsRow>& rows) {
    if (ids.size() != rows.size()) throw InvalidInput("kinematics ids and rows differ in length");
    CsvTable t;
    t.header = {"ps_id", "quantity", "index", "value"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto emit = [&](const char* name, const std::vector<double>& v) {
            for (std::size_t k = 0; k < v.size(); ++k)
                t.rows.push_back({fmt_count(ids[i]), name, fmt_count(k), format_number(v[k])});
        };
        emit("displacement", rows[i].displacement);
        emit("velocity", rows[i].velocity);
        emit("acceleration", rows[i].acceleration);
        emit("jerk", rows[i].jerk);
    }
    write_csv(path, t);
}

std::vector<psinsar::GnssRecord> read_gnss(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    const std::size_t c_lat = t.column("lat_deg"), c_lon = t.column("lon_deg"), c_v = t.column("vel_mm_yr");
    std::vector<psinsar::GnssRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({{t.number(r, c_lat), t.number(r, c_lon)}, t.number(r, c_v)});
    return out;
}

void write_gnss(const std::filesystem::path& path, const std::vector<psinsar::GnssRecord>& records) {
    CsvTable t;
    t.header = {"lat_deg", "lon_deg", "vel_mm_yr"};
    for (const auto& g : records)
        t.rows.push_back({format_number(g.pos.lat_deg), format_number(g.pos.lon_deg), format_number(g.velocity)});
    write_csv(path, t);
}

}  // namespace mmsar::io
