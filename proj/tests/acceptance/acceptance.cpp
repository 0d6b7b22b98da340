// One PASS/FAIL line per acceptance criterion. `--only <name>` runs a single one.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mmsar/coreg.hpp"
#include "mmsar/csv.hpp"
#include "mmsar/error.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/modal.hpp"
#include "mmsar/pipeline.hpp"
#include "mmsar/psinsar.hpp"
#include "mmsar/scene.hpp"
#include "mmsar/spectral.hpp"
#include "mmsar/subaperture.hpp"

using namespace mmsar;
namespace fs = std::filesystem;
namespace ps = mmsar::psinsar;

namespace {

// Pinned tolerances.
constexpr int kMicroSeeds = 5;
constexpr double kMicroZ = 5;
constexpr double kMicroSeconds = 60;
constexpr double kMicroAmpPx = 0.4;
constexpr double kDefocusRel = 0.25;
constexpr int kSubpixelTrials = 100;
constexpr double kSubpixelRms = 0.05;
constexpr double kSubpixelCorr = 0.95;
constexpr double kModalIdentity = 1e-8;
constexpr double kModalForced = 1e-10;
constexpr double kRiceNorm = 1e-6;
constexpr double kRiceRecall = 0.95;
constexpr double kRicePrecision = 0.9;
constexpr double kKinematics = 1e-9;
constexpr double kGnssDistance = 0.5;
constexpr double kGnssMaxDist = 100;
constexpr double kGnssPearson = 0.9;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome micro_motion() {
    int ok = 0;
    std::string detail;
    double worst_t = 0;
    for (int seed = 1; seed <= kMicroSeeds; ++seed) {
        const auto t0 = std::chrono::steady_clock::now();
        auto sc = fixtures::line_scene(0.1);  // unit scatterers, 20 dB per-sample SNR
        const auto plan = fixtures::demo_plan(sc.meta);
        const double f0 = plan.max_observable_frequency() / 3;
        fixtures::make_vibrating(sc, 9, f0, kMicroAmpPx, 0.7 * seed);
        const auto raw = sim::simulate_raw(sc, fixtures::kDemoRows, fixtures::kDemoCols, std::uint64_t(seed));
        const auto stack = subap::decompose(raw, plan);
        const auto res = coreg::track(stack, fixtures::demo_coreg());
        const auto map = modal::vibration_map(res.series);
        const auto rep = modal::detect_anomalies(map, 3);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        worst_t = std::max(worst_t, secs);

        const auto want = sim::focused_position(sc, sc.scatterers[9]);
        const double bin = map.freqs.size() > 1 ? std::abs(map.freqs[1] - map.freqs[0]) : 0;
        bool hit = false;
        for (const auto& a : rep.anomalies) {
            if (std::abs(double(a.pixel.row) - want[0]) > 2 || std::abs(double(a.pixel.col) - want[1]) > 1) continue;
            const bool freq_ok = a.dominant_freq && std::abs(std::abs(*a.dominant_freq) - f0) <= bin;
            hit = freq_ok && a.z_score > kMicroZ;
            detail += fmt(" seed%d z=%.1f f=%.3f/%.3f", seed, a.z_score, a.dominant_freq ? *a.dominant_freq : 0.0, f0);
        }
        if (!hit && detail.find(fmt(" seed%d ", seed)) == std::string::npos) detail += fmt(" seed%d missed", seed);
        ok += hit && secs < kMicroSeconds;
    }
    return {ok == kMicroSeeds, fmt("%d/%d seeds, max %.1f s;", ok, kMicroSeeds, worst_t) + detail};
}

Outcome defocus() {
    struct Setting {
        double L, v_p, gamma;
    };
    // the third setting squints so that the Doppler centroid aliases to zero at this prf
    const std::vector<Setting> settings{{100, 100, kPi / 2}, {60, 120, kPi / 2}, {100, 100, std::acos(0.0248)}};
    bool pass = true;
    double worst = 0;
    for (const auto& st : settings)
        for (double vx : {-2.0, -1.0, 1.0, 2.0}) {
            auto sc = fixtures::small_scene({fixtures::point(5450, 80)});
            sc.meta.L = st.L;
            sc.meta.v_p = st.v_p;
            sc.meta.gamma = st.gamma;
            sc.extent_az = 400;
            // beam centre crosses the target mid-raster
            sc.scatterers[0].pos_az = 128 * st.v_p / sc.meta.prf + 5450 / std::tan(st.gamma);
            sc.scatterers[0].velocity_az = vx;
            const auto raw = sim::simulate_raw(sc, 256, 64, 0);
            // two half-band looks of the focused target
            const auto plan = subap::make_plan(raw.meta(), raw.shape(), 2, 0.0);
            const auto stack = subap::decompose(raw, plan);
            double x[2];
            for (std::size_t i = 0; i < 2; ++i)
                x[stack.band_index[i]] = fixtures::peak_position(stack.images[i])[0] * sc.meta.azimuth_spacing();
            const double want = 2 * st.L * vx / (st.v_p * std::sin(st.gamma));
            const double got = 2 * (x[0] - x[1]);
            const double rel = std::abs(got - want) / std::abs(want);
            worst = std::max(worst, rel);
            pass = pass && got * want > 0 && rel <= kDefocusRel;
        }
    return {pass, fmt("3 settings x 4 velocities, worst relative error %.3f (limit %.2f)", worst, kDefocusRel)};
}

ComplexRaster texture(std::size_t n, std::uint64_t seed) {
    const auto w = fixtures::random_raster(n, n, seed);
    ComplexRaster out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) out(r, c) += w((r + n + dr) % n, (c + n + dc) % n);
    return out;
}

Outcome subpixel() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    coreg::CoregConfig cfg;
    cfg.window_az = 24;
    cfg.window_rg = 24;
    double se_rg = 0, se_az = 0, min_corr = 1;
    for (int t = 0; t < kSubpixelTrials; ++t) {
        const auto img = texture(96, 5000 + std::uint64_t(t));
        const double d_az = u(rng), d_rg = u(rng);
        const auto o = coreg::match_patch(img, spectral_shift(img, d_az, d_rg), {48, 48}, cfg);
        se_rg += (o.d_rg - d_rg) * (o.d_rg - d_rg);
        se_az += (o.d_az - d_az) * (o.d_az - d_az);
        min_corr = std::min(min_corr, o.peak_corr);
    }
    const double rms_rg = std::sqrt(se_rg / kSubpixelTrials), rms_az = std::sqrt(se_az / kSubpixelTrials);
    return {rms_rg <= kSubpixelRms && rms_az <= kSubpixelRms && min_corr > kSubpixelCorr,
            fmt("RMS rg %.4f az %.4f px (limit %.2f), min corr %.4f", rms_rg, rms_az, kSubpixelRms, min_corr)};
}

Eigen::MatrixXd random_spd(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    Eigen::VectorXd d(n);
    for (std::size_t i = 0; i < n; ++i) d(i) = u(rng);
    return q * d.asDiagonal() * q.transpose();
}

Outcome modal_math() {
    std::mt19937_64 rng(11);
    std::vector<double> grid(200);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.1 + 0.1 * double(i);
    double worst_id = 0, worst_forced = 0;
    for (int s = 0; s < 10; ++s) {
        modal::ModalSystem sys;
        sys.mass = random_spd(4, 0.5, 3, rng);
        sys.stiffness = random_spd(4, 10, 300, rng);
        sys.damping = random_spd(4, 0.05, 1, rng);
        const auto fr = modal::frequency_response(sys, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (fr.singular[i]) {
                worst_id = INFINITY;
                continue;
            }
            const modal::CMatrix z = modal::dynamic_stiffness(sys, grid[i]);
            worst_id = std::max(worst_id, (fr.H[i] * z - modal::CMatrix::Identity(4, 4)).norm());
        }
        std::normal_distribution<double> g;
        for (double w : {0.7, 5.0, 13.0}) {
            modal::CVector f(4);
            for (int i = 0; i < 4; ++i) f(i) = {g(rng), g(rng)};
            const auto y = modal::forced_response(sys, f, w);
            worst_forced = std::max(worst_forced, (modal::dynamic_stiffness(sys, w) * y - f).norm() / f.norm());
        }
    }
    // SDOF resonance at sqrt(k/m - c^2/2m^2)
    const double m = 1, c = 0.1, k = 100, w_peak = std::sqrt(k / m - c * c / (2 * m * m));
    std::vector<double> fine(2001);
    for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = 5 + 10 * double(i) / 2000;
    const auto fr = modal::frequency_response(modal::ModalSystem::sdof(m, c, k), fine);
    std::size_t best = 0;
    for (std::size_t i = 0; i < fine.size(); ++i)
        if (std::abs(fr.H[i](0, 0)) > std::abs(fr.H[best](0, 0))) best = i;
    const double step = fine[1] - fine[0];
    const bool res_ok = std::abs(fine[best] - w_peak) <= step;
    return {worst_id < kModalIdentity && worst_forced < kModalForced && res_ok,
            fmt("max |HZ-I| %.2e (limit %.0e), forced residual %.2e (limit %.0e), resonance %.4f vs %.4f", worst_id,
                kModalIdentity, worst_forced, kModalForced, fine[best], w_peak)};
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

Outcome rice() {
    double worst = 0;
    for (double nu : {0.5, 1.0, 5.0})
        for (double sigma : {0.5, 1.0, 2.0}) {
            const auto f = [&](double a) { return ps::rice_pdf(a, nu, sigma); };
            const double b = nu + 14 * sigma;
            const double fa = f(0), fb = f(b), fm = f(0.5 * b);
            worst = std::max(worst, std::abs(simpson(f, 0, b, fa, fm, fb, b / 6 * (fa + 4 * fm + fb), 1e-12, 50) - 1));
        }

    const std::size_t rows = 40, cols = 40, n = 30;
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> g;
    std::set<std::size_t> planted;
    std::uniform_int_distribution<std::size_t> pick(0, rows * cols - 1);
    while (planted.size() < 20) planted.insert(pick(rng));
    ps::SlcStack s;
    for (std::size_t k = 0; k < n; ++k) {
        ComplexRaster img(rows, cols, fixtures::small_meta());
        for (std::size_t i = 0; i < rows * cols; ++i)
            img.data()[i] = {(planted.count(i) ? 10.0 : 0.0) + g(rng), g(rng)};
        s.images.push_back(std::move(img));
        s.times_days.push_back(11.0 * double(k));
    }
    s.master_index = ps::SlcStack::central_master(n);
    const auto sel = ps::select_ps(s);
    std::size_t hits = 0;
    for (const auto& p : sel) hits += planted.count(p.id);
    const double recall = double(hits) / double(planted.size());
    const double precision = sel.empty() ? 0 : double(hits) / double(sel.size());
    return {worst <= kRiceNorm && recall >= kRiceRecall && precision >= kRicePrecision,
            fmt("normalization error %.1e (limit %.0e), recall %.3f, precision %.3f", worst, kRiceNorm, recall,
                precision)};
}

Outcome kinematics() {
    std::vector<double> t, d1, d2, d3;
    for (int k = 0; k < 12; ++k) {
        t.push_back(k);
        d1.push_back(k);
        d2.push_back(double(k) * k);
        d3.push_back(double(k) * k * k);
    }
    double worst = 0;
    for (double v : ps::kinematics(d1, t).velocity) worst = std::max(worst, std::abs(v - 1));
    for (double v : ps::kinematics(d2, t).acceleration) worst = std::max(worst, std::abs(v - 2));
    for (double v : ps::kinematics(d3, t).jerk) worst = std::max(worst, std::abs(v - 6));
    return {worst <= kKinematics, fmt("max deviation %.1e (limit %.0e)", worst, kKinematics)};
}

Outcome inversion() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0, 0.3);
    std::vector<double> t;
    for (int k = 0; k <= 40; ++k) t.push_back(0.25 * k);
    const std::size_t n_ps = 40, junction = 22;
    const double spacing = 5;
    std::vector<ps::ProfilePoint> prof;
    for (std::size_t i = 0; i < n_ps; ++i) {
        const double a = i < junction ? 0.8 : -0.6;
        std::vector<double> d;
        for (double x : t) d.push_back(0.5 * a * x * x - 2 * x + g(rng));
        prof.push_back({i, spacing * double(i), ps::kinematics(d, t).mean_acceleration});
    }
    const auto r = ps::find_inversion_lines({prof});
    const double planted = spacing * (double(junction) - 0.5);
    const bool one = r.crossings.size() == 1;
    const double err = one ? std::abs(r.crossings[0].position - planted) : INFINITY;
    return {one && err <= spacing, fmt("%zu crossing(s), offset from junction %.2f m (limit %.0f m)",
                                       r.crossings.size(), err, spacing)};
}

struct InsituRow {
    ps::GnssRecord gnss;
    ps::PsVelocity ps;
    double listed_distance;
};

std::vector<InsituRow> insitu_rows() {
    const auto t = io::read_csv(fs::path(MMSAR_DATA_DIR) / "gnss_insitu.csv");
    const std::size_t la = t.column("lat_deg"), lo = t.column("lon_deg"), v = t.column("vel_mm_yr");
    const std::size_t pla = t.column("ps_lat_deg"), plo = t.column("ps_lon_deg"), pv = t.column("ps_vel_mm_yr");
    const std::size_t dist = t.column("listed_distance_m");
    std::vector<InsituRow> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        out.push_back({{{t.number(r, la), t.number(r, lo)}, t.number(r, v)},
                       {r, {t.number(r, pla), t.number(r, plo)}, t.number(r, pv)},
                       t.number(r, dist)});
    return out;
}

Outcome gnss_distance() {
    const auto rows = insitu_rows();
    std::vector<ps::GnssRecord> gnss;
    std::vector<ps::PsVelocity> pts;
    for (const auto& r : rows) {
        gnss.push_back(r.gnss);
        pts.push_back(r.ps);
    }
    const auto rep = ps::compare_gnss(pts, gnss, kGnssMaxDist);
    std::map<std::size_t, const ps::GnssPair*> by_row;
    for (const auto& p : rep.pairs) by_row[p.gnss_index] = &p;
    std::size_t ok = 0;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto it = by_row.find(i);
        if (it == by_row.end()) {
            detail += fmt(" row%zu unpaired(listed %.2f)", i + 1, rows[i].listed_distance);
            continue;
        }
        const double d = it->second->distance_m;
        const bool good = it->second->ps_id == i && std::abs(d - rows[i].listed_distance) <= kGnssDistance;
        ok += good;
        if (!good) detail += fmt(" row%zu %.2f/%.2f", i + 1, d, rows[i].listed_distance);
    }
    return {ok == rows.size(), fmt("%zu/%zu rows within %.1f m of the listed distance;", ok, rows.size(),
                                   kGnssDistance) + detail};
}

Outcome gnss_pearson() {
    const auto rows = insitu_rows();
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(r.gnss.velocity);
        y.push_back(r.ps.velocity);
    }
    // direct formula first
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double direct = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    const double lib = ps::pearson(x, y);
    return {direct > kGnssPearson && std::abs(lib - direct) < 1e-12,
            fmt("direct %.6f, library %.6f (limit > %.1f)", direct, lib, kGnssPearson)};
}

std::map<std::string, std::string> read_outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[fs::relative(e.path(), dir).generic_string()] = s.str();
    }
    return out;
}

Outcome determinism() {
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* name : {"run_a", "run_b"}) {
        const fs::path dir = fs::path(MMSAR_TEST_TMP) / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (const char* f : {"run.json", "scene.json"})
            fs::copy_file(fs::path(MMSAR_DATA_DIR) / "demo" / f, dir / f);
        const auto cfg = pipeline::load_config(dir / "run.json");
        pipeline::run_pipeline(cfg);
        runs.push_back(read_outputs(cfg.out_dir));
    }
    std::size_t csv = 0, raster = 0;
    for (const auto& [k, v] : runs[0]) {
        csv += k.ends_with(".csv");
        raster += k.ends_with(".mmsr") || k.ends_with(".pgm");
    }
    const bool same = runs[0] == runs[1] && csv > 0 && raster > 0;
    return {same, fmt("%zu files compared (%zu CSV, %zu raster/graymap), %s", runs[0].size(), csv, raster,
                      runs[0] == runs[1] ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"micro_motion", micro_motion}, {"defocus", defocus},         {"subpixel", subpixel},
        {"modal_math", modal_math},     {"rice", rice},               {"kinematics", kinematics},
        {"inversion", inversion},       {"gnss_distance", gnss_distance}, {"gnss_pearson", gnss_pearson},
        {"determinism", determinism}};
    std::string only;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--only" && i + 1 < argc) only = argv[++i];

    int failed = 0, ran = 0;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && name != only) continue;
        ++ran;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    if (ran == 0) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
