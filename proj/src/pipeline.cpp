#include "mmsar/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "mmsar/error.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/modal.hpp"
#include "mmsar/raster_io.hpp"
#include "mmsar/scene.hpp"
#include "mmsar/subaperture.hpp"

namespace mmsar::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex(const unsigned char* d, unsigned n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < n; ++i) {
        s += digits[d[i] >> 4];
        s += digits[d[i] & 15];
    }
    return s;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal();
}

fs::path atmo_file(const fs::path& dir, std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof name, "atmo_%03zu.mmsr", k);
    return dir / name;
}

void add_raster(std::vector<fs::path>& v, const fs::path& p) {
    v.push_back(p);
    if (fs::exists(sidecar_path(p))) v.push_back(sidecar_path(p));
}

std::string taper_name(Taper t) { return t == Taper::Hann ? "hann" : "rect"; }
std::string mode_name(psinsar::StabilityMode m) {
    return m == psinsar::StabilityMode::Dispersion ? "dispersion" : "inverse-stability";
}
std::string scale_name(report::HeatScale s) { return s == report::HeatScale::Linear ? "linear" : "quantile"; }

template <class F>
void for_keys(const json& j, const char* what, F&& f) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!f(it.key(), it.value())) throw ConfigError(std::string("unknown ") + what + " key: " + it.key());
}

}  // namespace

std::string sha256_bytes(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 failed");
    return hex(md, n);
}

std::string sha256_path(const fs::path& path) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::string list;
        for (const auto& f : files) list += fs::relative(f, path).generic_string() + '\0' + sha256_path(f) + '\n';
        return sha256_bytes(list);
    }
    return sha256_bytes(read_file(path));
}

psinsar::GeoPoint GeoTransform::operator()(PixelCoord p) const {
    const auto r = static_cast<double>(p.row), c = static_cast<double>(p.col);
    return {lat0 + r * dlat_row + c * dlat_col, lon0 + r * dlon_row + c * dlon_col};
}

StackList load_stack_list(const fs::path& path) {
    const json j = read_json(path);
    const fs::path base = path.parent_path();
    StackList s;
    try {
        for_keys(j, "stack list", [&](const std::string& k, const json& v) {
            if (k == "images") {
                for (const auto& p : v) s.images.push_back(resolve(base, p.get<std::string>()));
            } else if (k == "times_days") {
                s.times_days = v.get<std::vector<double>>();
            } else if (k == "master_index") {
                s.master_index = v.get<std::size_t>();
            } else if (k == "geometry") {
                for (const auto& g : v) {
                    psinsar::PairGeometry pg;
                    pg.b_perp = g.at("b_perp").get<double>();
                    pg.incidence = g.at("incidence").get<double>();
                    pg.alpha = g.value("alpha", 0.0);
                    s.geometry[g.at("image").get<std::size_t>()] = pg;
                }
            } else if (k == "height_map") {
                s.height_map = resolve(base, v.get<std::string>());
            } else if (k == "reference_range") {
                s.reference_range = v.get<double>();
            } else if (k == "geo") {
                GeoTransform g;
                const auto o = v.at("origin").get<std::vector<double>>();
                const auto r = v.at("per_row").get<std::vector<double>>();
                const auto c = v.at("per_col").get<std::vector<double>>();
                if (o.size() != 2 || r.size() != 2 || c.size() != 2)
                    throw ConfigError("geo entries must be [lat, lon] pairs");
                g.lat0 = o[0];
                g.lon0 = o[1];
                g.dlat_row = r[0];
                g.dlon_row = r[1];
                g.dlat_col = c[0];
                g.dlon_col = c[1];
                s.geo = g;
            } else {
                return false;
            }
            return true;
        });
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (s.images.size() != s.times_days.size()) throw ConfigError("stack list needs one time per image");
    return s;
}

json stack_list_to_json(const StackList& s) {
    json j;
    j["images"] = json::array();
    for (const auto& p : s.images) j["images"].push_back(p.generic_string());
    j["times_days"] = s.times_days;
    if (s.master_index) j["master_index"] = *s.master_index;
    j["geometry"] = json::array();
    for (const auto& [k, g] : s.geometry)
        j["geometry"].push_back({{"image", k}, {"b_perp", g.b_perp}, {"incidence", g.incidence}, {"alpha", g.alpha}});
    if (s.height_map) j["height_map"] = s.height_map->generic_string();
    if (s.reference_range > 0) j["reference_range"] = s.reference_range;
    if (s.geo)
        j["geo"] = {{"origin", {s.geo->lat0, s.geo->lon0}},
                    {"per_row", {s.geo->dlat_row, s.geo->dlon_row}},
                    {"per_col", {s.geo->dlat_col, s.geo->dlon_col}}};
    return j;
}

std::vector<fs::path> psinsar_inputs(const fs::path& stack_list, const std::optional<fs::path>& atmo_dir) {
    std::vector<fs::path> v{stack_list};
    if (!fs::exists(stack_list)) return v;
    const StackList s = load_stack_list(stack_list);
    for (const auto& p : s.images) add_raster(v, p);
    if (s.height_map) add_raster(v, *s.height_map);
    if (atmo_dir)
        for (std::size_t k = 0; k < s.images.size(); ++k)
            if (fs::exists(atmo_file(*atmo_dir, k))) add_raster(v, atmo_file(*atmo_dir, k));
    return v;
}

std::vector<io::PsTrack> run_psinsar(const fs::path& stack_list, const std::optional<fs::path>& atmo_dir,
                                     const psinsar::PsConfig& cfg) {
    const StackList sl = load_stack_list(stack_list);
    psinsar::SlcStack st;
    for (const auto& p : sl.images) st.images.push_back(read_raster(p));
    st.times_days = sl.times_days;
    st.master_index = sl.master_index.value_or(psinsar::SlcStack::central_master(st.images.size()));
    st.validate();

    const auto ps = psinsar::select_ps(st, cfg);

    psinsar::PhaseModelInput in;
    in.geometry = sl.geometry;
    in.reference_range = sl.reference_range;
    if (atmo_dir) {
        if (!fs::is_directory(*atmo_dir)) throw InvalidInput("atmosphere directory not found: " + atmo_dir->string());
        for (std::size_t k = 0; k < st.images.size(); ++k) {
            const fs::path f = atmo_file(*atmo_dir, k);
            if (!fs::exists(f)) continue;
            const ComplexRaster a = read_raster(f);
            RealGrid g(a.n_az(), a.n_rg());
            for (std::size_t i = 0; i < a.size(); ++i) g.values[i] = a.data()[i].real();
            in.atmo[k] = std::move(g);
        }
    }
    if (sl.height_map) {
        const ComplexRaster h = read_raster(*sl.height_map);
        if (!h.same_shape(st.images[0])) throw InvalidInput("height map differs from the stack size");
        for (const auto& p : ps)
            in.heights[p.id] = h(static_cast<std::size_t>(p.pixel.row), static_cast<std::size_t>(p.pixel.col)).real();
    }
    const auto series = psinsar::phase_model(st, ps, in);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<io::PsTrack> out;
    for (const auto& s : series) {
        io::PsTrack t;
        t.id = s.id;
        t.pixel = s.pixel;
        t.pos = sl.geo ? (*sl.geo)(s.pixel) : psinsar::GeoPoint{nan, nan};
        t.d_a = s.fit.d_a;
        t.reliable = s.reliable;
        for (double d : s.times_days) t.times_yr.push_back(d / 365.25);
        t.disp_mm = s.displacement_mm;
        out.push_back(std::move(t));
    }
    return out;
}

KinematicsTable kinematics_table(const std::vector<io::PsTrack>& tracks) {
    KinematicsTable k;
    for (const auto& t : tracks) {
        if (!t.reliable || t.disp_mm.size() < 4) continue;
        auto row = psinsar::kinematics(t.disp_mm, t.times_yr);
        k.summary.push_back({t.id, t.pixel, t.pos, row.mean_velocity, row.mean_acceleration});
        k.ids.push_back(t.id);
        k.rows.push_back(std::move(row));
    }
    return k;
}

psinsar::ComparisonReport compare_from_kinematics(const std::vector<io::KinRecord>& kin,
                                                  const std::vector<psinsar::GnssRecord>& gnss, double max_dist) {
    std::vector<psinsar::PsVelocity> ps;
    for (const auto& k : kin)
        if (std::isfinite(k.pos.lat_deg) && std::isfinite(k.pos.lon_deg)) ps.push_back({k.id, k.pos, k.mean_velocity});
    return psinsar::compare_gnss(ps, gnss, max_dist);
}

psinsar::StabilityMode parse_stability_mode(const std::string& s) {
    if (s == "inverse-stability") return psinsar::StabilityMode::InverseStability;
    if (s == "dispersion") return psinsar::StabilityMode::Dispersion;
    throw ConfigError("stability mode must be \"inverse-stability\" or \"dispersion\"");
}

Taper parse_taper(const std::string& s) {
    if (s == "rect") return Taper::Rect;
    if (s == "hann") return Taper::Hann;
    throw ConfigError("taper must be \"rect\" or \"hann\"");
}

report::HeatScale parse_heat_scale(const std::string& s) {
    if (s == "linear") return report::HeatScale::Linear;
    if (s == "quantile") return report::HeatScale::Quantile;
    throw ConfigError("heat scale must be \"linear\" or \"quantile\"");
}

void PipelineConfig::validate() const {
    if (out_dir.empty()) throw ConfigError("out_dir is required");
    if (scene.has_value() == raw.has_value()) throw ConfigError("exactly one of scene and raw must be given");
    if (scene && (rows == 0 || cols == 0)) throw ConfigError("simulation needs positive rows and cols");
    if (n_bands < 2) throw ConfigError("at least two sub-aperture bands are needed");
    if (!(overlap >= 0 && overlap < 1)) throw ConfigError("band overlap must lie in [0, 1)");
    if (!(processed_bandwidth >= 0)) throw ConfigError("processed bandwidth must be non-negative");
    if (!std::isfinite(z_threshold)) throw ConfigError("z threshold must be finite");
    coreg.validate();
    if (psinsar) {
        if (!(psinsar->max_dist > 0)) throw ConfigError("GNSS pairing distance must be positive");
        if (!std::isfinite(psinsar->ps.threshold)) throw ConfigError("stability threshold must be finite");
    }
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
    PipelineConfig c;
    try {
        for_keys(j, "run config", [&](const std::string& k, const json& v) {
            if (k == "out_dir") c.out_dir = resolve(base_dir, v.get<std::string>());
            else if (k == "scene") c.scene = resolve(base_dir, v.get<std::string>());
            else if (k == "raw") c.raw = resolve(base_dir, v.get<std::string>());
            else if (k == "rows") c.rows = v.get<std::size_t>();
            else if (k == "cols") c.cols = v.get<std::size_t>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (k == "subap") {
                for_keys(v, "subap", [&](const std::string& sk, const json& sv) {
                    if (sk == "bands") c.n_bands = sv.get<std::size_t>();
                    else if (sk == "overlap") c.overlap = sv.get<double>();
                    else if (sk == "taper") c.taper = parse_taper(sv.get<std::string>());
                    else if (sk == "processed_bandwidth") c.processed_bandwidth = sv.get<double>();
                    else return false;
                    return true;
                });
            } else if (k == "coreg") {
                c.coreg = coreg::config_from_json(v);
            } else if (k == "modal") {
                for_keys(v, "modal", [&](const std::string& mk, const json& mv) {
                    if (mk == "z") c.z_threshold = mv.get<double>();
                    else if (mk == "fit_order") c.fit_order = mv.get<std::size_t>();
                    else if (mk == "heat_scale") c.heat_scale = parse_heat_scale(mv.get<std::string>());
                    else return false;
                    return true;
                });
            } else if (k == "psinsar") {
                PsinsarStageConfig p;
                for_keys(v, "psinsar", [&](const std::string& pk, const json& pv) {
                    if (pk == "stack") p.stack_list = resolve(base_dir, pv.get<std::string>());
                    else if (pk == "atmo") p.atmo_dir = resolve(base_dir, pv.get<std::string>());
                    else if (pk == "da") p.ps.threshold = pv.get<double>();
                    else if (pk == "mode") p.ps.mode = parse_stability_mode(pv.get<std::string>());
                    else if (pk == "gnss") p.gnss = resolve(base_dir, pv.get<std::string>());
                    else if (pk == "maxdist") p.max_dist = pv.get<double>();
                    else return false;
                    return true;
                });
                if (p.stack_list.empty()) throw ConfigError("psinsar.stack is required");
                c.psinsar = p;
            } else {
                return false;
            }
            return true;
        });
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad run config: ") + e.what());
    }
    c.validate();
    return c;
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["out_dir"] = c.out_dir.generic_string();
    if (c.scene) j["scene"] = c.scene->generic_string();
    if (c.raw) j["raw"] = c.raw->generic_string();
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["seed"] = c.seed;
    j["subap"] = {{"bands", c.n_bands},
                  {"overlap", c.overlap},
                  {"taper", taper_name(c.taper)},
                  {"processed_bandwidth", c.processed_bandwidth}};
    j["coreg"] = coreg::config_to_json(c.coreg);
    j["modal"] = {{"z", c.z_threshold}, {"fit_order", c.fit_order}, {"heat_scale", scale_name(c.heat_scale)}};
    if (c.psinsar) {
        json p{{"stack", c.psinsar->stack_list.generic_string()},
               {"da", c.psinsar->ps.threshold},
               {"mode", mode_name(c.psinsar->ps.mode)},
               {"maxdist", c.psinsar->max_dist}};
        if (c.psinsar->atmo_dir) p["atmo"] = c.psinsar->atmo_dir->generic_string();
        if (c.psinsar->gnss) p["gnss"] = c.psinsar->gnss->generic_string();
        j["psinsar"] = p;
    }
    return j;
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    return config_from_json(read_json(path), fs::absolute(path).parent_path());
}

const StageRecord* RunManifest::find(const std::string& name) const {
    for (const auto& s : stages)
        if (s.name == name) return &s;
    return nullptr;
}

json manifest_to_json(const RunManifest& m) {
    json stages = json::array();
    for (const auto& s : m.stages)
        stages.push_back({{"name", s.name},
                          {"inputs", s.inputs},
                          {"outputs", s.outputs},
                          {"params_hash", s.params_hash},
                          {"seconds", s.seconds}});
    return {{"config_hash", m.config_hash}, {"tool_version", m.tool_version}, {"stages", stages}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    try {
        m.config_hash = j.at("config_hash").get<std::string>();
        m.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& s : j.at("stages")) {
            StageRecord r;
            r.name = s.at("name").get<std::string>();
            r.inputs = s.at("inputs").get<std::map<std::string, std::string>>();
            r.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
            r.params_hash = s.at("params_hash").get<std::string>();
            r.seconds = s.at("seconds").get<double>();
            m.stages.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad manifest: ") + e.what());
    }
    return m;
}

namespace {

struct Stage {
    std::string name;
    std::vector<fs::path> inputs;
    json params;
    std::vector<fs::path> outputs;
    std::function<void()> run;
};

class Runner {
public:
    Runner(const fs::path& out_dir, std::string config_hash) : path_(out_dir / "manifest.json") {
        current_.config_hash = std::move(config_hash);
        if (fs::exists(path_)) {
            try {
                previous_ = manifest_from_json(read_json(path_));
            } catch (const InputError&) {
                previous_ = RunManifest{};  // unreadable manifest: rerun everything
            }
        }
    }

    void operator()(const Stage& st) {
        StageRecord rec;
        rec.name = st.name;
        rec.params_hash = sha256_bytes(st.params.dump());
        try {
            for (const auto& p : st.inputs) {
                if (!fs::exists(p)) throw InvalidInput("input not found: " + p.string());
                rec.inputs[p.generic_string()] = sha256_path(p);
            }
            if (const StageRecord* old = previous_.find(st.name); old && up_to_date(*old, rec, st)) {
                StageRecord kept = *old;
                kept.skipped = true;
                commit(std::move(kept));
                return;
            }
            const auto t0 = std::chrono::steady_clock::now();
            st.run();
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (const auto& p : st.outputs) {
                if (!fs::exists(p)) throw NumericError("stage did not produce " + p.string());
                rec.outputs[p.generic_string()] = sha256_path(p);
            }
        } catch (const StageError&) {
            throw;
        } catch (const Error& e) {
            throw StageError(st.name, e.what(), e.exit_code());
        } catch (const json::exception& e) {
            throw StageError(st.name, e.what(), 2);
        } catch (const std::exception& e) {
            throw StageError(st.name, e.what(), 3);
        }
        commit(std::move(rec));
    }

    const RunManifest& manifest() const { return current_; }

private:
    static bool up_to_date(const StageRecord& old, const StageRecord& now, const Stage& st) {
        if (old.inputs != now.inputs || old.params_hash != now.params_hash) return false;
        if (old.outputs.size() != st.outputs.size()) return false;
        for (const auto& p : st.outputs) {
            const auto it = old.outputs.find(p.generic_string());
            if (it == old.outputs.end() || !fs::exists(p) || sha256_path(p) != it->second) return false;
        }
        return true;
    }

    void commit(StageRecord rec) {
        current_.stages.push_back(std::move(rec));
        // write-then-rename keeps the manifest whole if the process dies mid-write
        const fs::path tmp = path_.string() + ".tmp";
        {
            std::ofstream os(tmp, std::ios::trunc);
            os << manifest_to_json(current_).dump(2) << '\n';
            if (!os) throw InvalidInput("cannot write " + tmp.string());
        }
        fs::rename(tmp, path_);
    }

    fs::path path_;
    RunManifest previous_;
    RunManifest current_;
};

std::vector<fs::path> raster_files(const fs::path& p) {
    std::vector<fs::path> v;
    v.push_back(p);
    v.push_back(sidecar_path(p));
    return v;
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    Runner run(cfg.out_dir, sha256_bytes(config_to_json(cfg).dump()));
    const fs::path& out = cfg.out_dir;

    fs::path raw = cfg.raw.value_or(out / "raw.mmsr");
    if (cfg.scene) {
        const fs::path scene = *cfg.scene;
        run({"simulate",
             {scene},
             {{"rows", cfg.rows}, {"cols", cfg.cols}, {"seed", cfg.seed}},
             raster_files(raw),
             [&] { write_raster(raw, sim::simulate_raw(sim::load_scene(scene), cfg.rows, cfg.cols, cfg.seed)); }});
    }
    std::vector<fs::path> raw_in;
    if (cfg.raw)
        add_raster(raw_in, raw);
    else
        raw_in = raster_files(raw);
    const fs::path slc = out / "slc.mmsr";
    run({"focus", raw_in, json::object(), raster_files(slc), [&] { write_raster(slc, focus::focus(read_raster(raw))); }});

    const fs::path stack_dir = out / "stack";
    const json subap_params{{"bands", cfg.n_bands},
                            {"overlap", cfg.overlap},
                            {"taper", taper_name(cfg.taper)},
                            {"processed_bandwidth", cfg.processed_bandwidth}};
    run({"subap", raw_in, subap_params, {stack_dir}, [&] {
             const ComplexRaster r = read_raster(raw);
             const auto plan = subap::make_plan(r.meta(), r.shape(), cfg.n_bands, cfg.overlap, cfg.taper,
                                                cfg.processed_bandwidth);
             if (fs::exists(stack_dir)) fs::remove_all(stack_dir);
             subap::write_stack(stack_dir, subap::decompose(r, plan));
         }});

    const fs::path offsets = out / "offsets.csv";
    run({"track", {stack_dir}, coreg::config_to_json(cfg.coreg), {offsets},
         [&] { io::write_offsets(offsets, coreg::track(subap::read_stack(stack_dir), cfg.coreg).series); }});

    const fs::path vibmap = out / "vibmap.csv", anomalies = out / "anomalies.csv", heat = out / "vibmap.pgm",
                   fit_path = out / "modal_fit.json";
    std::vector<fs::path> modal_out{vibmap, anomalies, heat};
    if (cfg.fit_order > 0) modal_out.push_back(fit_path);
    run({"modal",
         {offsets, slc},
         {{"z", cfg.z_threshold}, {"fit_order", cfg.fit_order}, {"heat_scale", scale_name(cfg.heat_scale)}},
         modal_out,
         [&] {
             const auto series = io::read_offsets(offsets);
             const auto map = modal::vibration_map(series);
             io::write_vibmap(vibmap, map);
             io::write_anomalies(anomalies, modal::detect_anomalies(map, cfg.z_threshold));
             const ComplexRaster s = read_raster(slc);
             report::render_heatmap(report::energy_grid(map, s.n_az(), s.n_rg()), heat, cfg.heat_scale);
             if (cfg.fit_order > 0) {
                 const auto fit = modal::fit_modal_params(series, cfg.fit_order);
                 json j{{"omega_n", fit.omega_n},
                        {"zeta", fit.zeta},
                        {"amplitude", fit.amplitude},
                        {"r_squared", fit.r_squared},
                        {"residual_rms", fit.residual_rms}};
                 std::ofstream os(fit_path, std::ios::trunc);
                 os << j.dump(2) << '\n';
             }
         }});

    if (cfg.psinsar) {
        const PsinsarStageConfig& p = *cfg.psinsar;
        const fs::path ps_csv = out / "ps.csv", kin_csv = out / "kin.csv", kin_series = out / "kin_series.csv";
        run({"psinsar",
             psinsar_inputs(p.stack_list, p.atmo_dir),
             {{"da", p.ps.threshold}, {"mode", mode_name(p.ps.mode)}},
             {ps_csv},
             [&] { io::write_ps(ps_csv, run_psinsar(p.stack_list, p.atmo_dir, p.ps)); }});
        run({"kinematics", {ps_csv}, json::object(), {kin_csv, kin_series}, [&] {
                 const auto k = kinematics_table(io::read_ps(ps_csv));
                 io::write_kinematics(kin_csv, k.summary);
                 io::write_kinematics_series(kin_series, k.ids, k.rows);
             }});
        if (p.gnss) {
            const fs::path report = out / "report.json";
            run({"compare-gnss", {kin_csv, *p.gnss}, {{"maxdist", p.max_dist}}, {report}, [&] {
                     const auto rep = compare_from_kinematics(io::read_kinematics(kin_csv), io::read_gnss(*p.gnss),
                                                              p.max_dist);
                     std::ofstream os(report, std::ios::trunc);
                     os << psinsar::report_to_json(rep).dump(2) << '\n';
                 }});
        }
    }
    return run.manifest();
}

}  // namespace mmsar::pipeline
