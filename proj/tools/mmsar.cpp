#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmsar/coreg.hpp"
#include "mmsar/csv.hpp"
#include "mmsar/error.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/heatmap.hpp"
#include "mmsar/modal.hpp"
#include "mmsar/pipeline.hpp"
#include "mmsar/raster_io.hpp"
#include "mmsar/scene.hpp"
#include "mmsar/subaperture.hpp"

namespace fs = std::filesystem;
using namespace mmsar;

namespace {

nlohmann::json read_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InvalidInput("cannot open " + p.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(p.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& p, const nlohmann::json& j) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw InvalidInput("cannot write " + p.string());
}

// Grid size for point maps: explicit, from a raster, or the points' bounding box.
std::pair<std::size_t, std::size_t> grid_shape(const modal::VibrationMap& map, const std::string& image,
                                               std::size_t rows, std::size_t cols) {
    if (rows > 0 && cols > 0) return {rows, cols};
    if (!image.empty()) {
        const ComplexRaster r = read_raster(image);
        return {r.n_az(), r.n_rg()};
    }
    std::size_t mr = 0, mc = 0;
    for (const auto& p : map.points) {
        mr = std::max(mr, static_cast<std::size_t>(std::max<std::ptrdiff_t>(p.pixel.row, 0)) + 1);
        mc = std::max(mc, static_cast<std::size_t>(std::max<std::ptrdiff_t>(p.pixel.col, 0)) + 1);
    }
    return {mr, mc};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-aperture micro-motion and PS-InSAR processing"};
    app.require_subcommand(1);

    // simulate
    std::string scene_path, out_path, in_path;
    std::size_t rows = 0, cols = 0;
    std::uint64_t seed = 0;
    auto* sim = app.add_subcommand("simulate", "Raw echoes of a scene definition");
    sim->add_option("--scene", scene_path, "scene JSON")->required();
    sim->add_option("--out", out_path, "raw raster")->required();
    sim->add_option("--rows", rows, "azimuth lines")->required();
    sim->add_option("--cols", cols, "range samples")->required();
    sim->add_option("--seed", seed, "noise seed");

    auto* foc = app.add_subcommand("focus", "Range-Doppler focusing");
    foc->add_option("--in", in_path, "raw raster")->required();
    foc->add_option("--out", out_path, "focused raster")->required();

    std::size_t bands = 16;
    double overlap = 0.5, processed_bw = 0;
    std::string taper = "rect";
    auto* sub = app.add_subcommand("subap", "Doppler sub-aperture stack");
    sub->add_option("--in", in_path, "raw raster")->required();
    sub->add_option("--out", out_path, "stack directory")->required();
    sub->add_option("--bands", bands, "number of bands");
    sub->add_option("--overlap", overlap, "band overlap fraction");
    sub->add_option("--taper", taper, "rect or hann");
    sub->add_option("--processed-bandwidth", processed_bw, "Hz, 0 = full clean band");

    std::string stack_dir, config_path;
    auto* trk = app.add_subcommand("track", "Sub-pixel offset tracking across the stack");
    trk->add_option("--stack", stack_dir, "stack directory")->required();
    trk->add_option("--config", config_path, "coregistration JSON");
    trk->add_option("--out", out_path, "offsets CSV")->required();

    std::string offsets_path, anomalies_path, heatmap_path, image_path, fit_path, scale = "quantile";
    double z = 3;
    std::size_t fit_order = 0;
    auto* mod = app.add_subcommand("modal", "Vibration energy map and anomaly detection");
    mod->add_option("--offsets", offsets_path, "offsets CSV")->required();
    mod->add_option("--out", out_path, "vibration map CSV")->required();
    mod->add_option("--anomalies", anomalies_path, "anomalies CSV");
    mod->add_option("--z", z, "robust z threshold");
    mod->add_option("--heatmap", heatmap_path, "energy heatmap PGM");
    mod->add_option("--image", image_path, "raster giving the heatmap size");
    mod->add_option("--scale", scale, "linear or quantile");
    mod->add_option("--fit-order", fit_order, "modes to fit (0 = none)");
    mod->add_option("--fit-out", fit_path, "modal fit JSON");

    std::string atmo_dir, mode = "inverse-stability";
    double da = 0.8;
    auto* psi = app.add_subcommand("psinsar", "PS selection and displacement series");
    psi->add_option("--stack", stack_dir, "stack list JSON")->required();
    psi->add_option("--atmo", atmo_dir, "directory of atmo_NNN.mmsr screens");
    psi->add_option("--da", da, "stability threshold");
    psi->add_option("--mode", mode, "inverse-stability or dispersion");
    psi->add_option("--out", out_path, "PS CSV")->required();

    std::string series_path;
    auto* kin = app.add_subcommand("kinematics", "Velocity, acceleration and jerk per PS");
    kin->add_option("--in", in_path, "PS CSV")->required();
    kin->add_option("--out", out_path, "kinematics CSV")->required();
    kin->add_option("--series", series_path, "per-epoch derivative CSV");

    std::string ps_path, gnss_path;
    double maxdist = 100;
    auto* cmp = app.add_subcommand("compare-gnss", "Pair PS velocities with GNSS stations");
    cmp->add_option("--ps", ps_path, "kinematics CSV")->required();
    cmp->add_option("--gnss", gnss_path, "GNSS CSV")->required();
    cmp->add_option("--maxdist", maxdist, "pairing distance, m");
    cmp->add_option("--out", out_path, "report JSON")->required();

    auto* run = app.add_subcommand("run", "Whole pipeline from a run config");
    run->add_option("--config", config_path, "run JSON")->required();

    auto* ren = app.add_subcommand("render", "16-bit PGM of a raster amplitude or a vibration map");
    ren->add_option("--in", in_path, "MMSR raster or vibmap CSV")->required();
    ren->add_option("--out", out_path, "PGM")->required();
    ren->add_option("--scale", scale, "linear or quantile");
    ren->add_option("--rows", rows, "grid rows for CSV input");
    ren->add_option("--cols", cols, "grid cols for CSV input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const auto scene = sim::load_scene(scene_path);
            write_raster(out_path, sim::simulate_raw(scene, rows, cols, seed));
            std::cout << "wrote " << out_path << " (" << rows << " x " << cols << ")\n";
        } else if (*foc) {
            write_raster(out_path, focus::focus(read_raster(in_path)));
            std::cout << "wrote " << out_path << '\n';
        } else if (*sub) {
            const ComplexRaster raw = read_raster(in_path);
            const auto plan = subap::make_plan(raw.meta(), raw.shape(), bands, overlap, pipeline::parse_taper(taper),
                                               processed_bw);
            subap::write_stack(out_path, subap::decompose(raw, plan));
            std::cout << "wrote " << plan.n_bands << " bands to " << out_path << ", epoch spacing "
                      << plan.epoch_spacing() << " s\n";
        } else if (*trk) {
            coreg::CoregConfig cfg;
            if (!config_path.empty()) cfg = coreg::config_from_json(read_json_file(config_path));
            const auto res = coreg::track(subap::read_stack(stack_dir), cfg);
            io::write_offsets(out_path, res.series);
            std::cout << "tracked " << res.series.size() << " points (" << res.dropped_points << " dropped)\n";
        } else if (*mod) {
            const auto series = io::read_offsets(offsets_path);
            const auto map = modal::vibration_map(series);
            io::write_vibmap(out_path, map);
            std::cout << map.points.size() << " points, " << map.skipped << " skipped\n";
            if (!anomalies_path.empty()) {
                const auto rep = modal::detect_anomalies(map, z);
                io::write_anomalies(anomalies_path, rep);
                std::cout << rep.anomalies.size() << " anomalies" << (rep.degenerate ? " (degenerate MAD)" : "")
                          << '\n';
            }
            if (!heatmap_path.empty()) {
                const auto [r, c] = grid_shape(map, image_path, 0, 0);
                report::render_heatmap(report::energy_grid(map, r, c), heatmap_path,
                                       pipeline::parse_heat_scale(scale));
            }
            if (fit_order > 0) {
                const auto fit = modal::fit_modal_params(series, fit_order);
                nlohmann::json j{{"omega_n", fit.omega_n},
                                 {"zeta", fit.zeta},
                                 {"amplitude", fit.amplitude},
                                 {"r_squared", fit.r_squared},
                                 {"residual_rms", fit.residual_rms}};
                if (fit_path.empty())
                    std::cout << j.dump(2) << '\n';
                else
                    write_json_file(fit_path, j);
            }
        } else if (*psi) {
            psinsar::PsConfig cfg{da, pipeline::parse_stability_mode(mode)};
            const std::optional<fs::path> atmo = atmo_dir.empty() ? std::nullopt : std::optional<fs::path>(atmo_dir);
            const auto tracks = pipeline::run_psinsar(stack_dir, atmo, cfg);
            io::write_ps(out_path, tracks);
            std::cout << tracks.size() << " PS selected\n";
        } else if (*kin) {
            const auto table = pipeline::kinematics_table(io::read_ps(in_path));
            io::write_kinematics(out_path, table.summary);
            if (!series_path.empty()) io::write_kinematics_series(series_path, table.ids, table.rows);
            std::cout << table.summary.size() << " PS with kinematics\n";
        } else if (*cmp) {
            const auto rep =
                pipeline::compare_from_kinematics(io::read_kinematics(ps_path), io::read_gnss(gnss_path), maxdist);
            write_json_file(out_path, psinsar::report_to_json(rep));
            std::cout << rep.pairs.size() << " pairs, " << rep.skipped << " skipped, correlation "
                      << rep.correlation << '\n';
        } else if (*run) {
            const auto manifest = pipeline::run_pipeline(pipeline::load_config(config_path));
            for (const auto& s : manifest.stages)
                std::cout << s.name << ": " << (s.skipped ? "skipped" : "ran") << " (" << s.seconds << " s)\n";
        } else if (*ren) {
            const auto sc = pipeline::parse_heat_scale(scale);
            if (fs::path(in_path).extension() == ".csv") {
                modal::VibrationMap map;
                for (const auto& r : io::read_vibmap(in_path)) {
                    modal::PointVibration p;
                    p.point_id = r.point_id;
                    p.pixel = r.pixel;
                    p.energy = r.energy;
                    map.points.push_back(p);
                }
                const auto [r, c] = grid_shape(map, "", rows, cols);
                report::render_heatmap(report::energy_grid(map, r, c), out_path, sc);
            } else {
                report::render_heatmap(amplitude(read_raster(in_path)), out_path, sc);
            }
            std::cout << "wrote " << out_path << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
