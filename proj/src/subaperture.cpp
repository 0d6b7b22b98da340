#include "mmsar/subaperture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"
#include "mmsar/focuser.hpp"
#include "mmsar/parallel.hpp"
#include "mmsar/raster_io.hpp"

namespace mmsar::subap {

double doppler_rate(const AcquisitionMeta& meta, double r) {
    const double s = std::sin(meta.gamma);
    return -2.0 * meta.v_p * meta.v_p * s * s * s / (meta.wavelength * r);
}

double FrequencyPlan::epoch_spacing() const {
    return bandwidth * (1.0 - overlap_fraction) / std::abs(doppler_rate);
}

double FrequencyPlan::window_duration() const { return bandwidth / std::abs(doppler_rate); }

double FrequencyPlan::max_observable_frequency() const { return 1.0 / (2.0 * epoch_spacing()); }

void FrequencyPlan::validate() const {
    if (n_bands < 2 || centers.size() != n_bands || epoch_times.size() != n_bands)
        throw PlanInfeasible("frequency plan needs at least two bands with centres and epochs");
    if (!(bandwidth > 0) || !(prf > 0)) throw PlanInfeasible("frequency plan bandwidth and prf must be positive");
    if (!(overlap_fraction >= 0 && overlap_fraction < 1)) throw PlanInfeasible("overlap fraction must lie in [0, 1)");
    const double spacing = bandwidth * (1.0 - overlap_fraction);
    for (std::size_t k = 0; k < n_bands; ++k) {
        if (std::abs(centers[k]) + bandwidth / 2 > prf / 2 + 1e-9 * prf)
            throw PlanInfeasible("band " + std::to_string(k) + " leaves the azimuth Nyquist band");
        if (k > 0) {
            if (!(centers[k] > centers[k - 1])) throw PlanInfeasible("band centres must strictly increase");
            if (std::abs(centers[k] - centers[k - 1] - spacing) > 1e-9)
                throw PlanInfeasible("band spacing must equal bandwidth*(1-overlap)");
        }
    }
}

FrequencyPlan make_plan(const AcquisitionMeta& meta, RasterShape shape, std::size_t n_bands, double overlap_fraction,
                        Taper taper, double processed_bandwidth) {
    meta.validate();
    if (n_bands < 2) throw PlanInfeasible("a plan needs at least two bands");
    if (!(overlap_fraction >= 0 && overlap_fraction < 1)) throw PlanInfeasible("overlap fraction must lie in [0, 1)");
    if (shape.n_az < 2 || shape.n_rg < 2) throw InvalidInput("raster shape must be at least 2x2");

    const double dc = meta.doppler_center;
    double half = meta.prf / 2 - std::abs(dc);
    if (!(half > 0)) throw PlanInfeasible("doppler centre leaves no processable band");
    if (processed_bandwidth < 0) throw PlanInfeasible("processed bandwidth must not be negative");
    if (processed_bandwidth > 0) {
        if (processed_bandwidth > 2 * half + 1e-9 * meta.prf)
            throw PlanInfeasible("processed bandwidth exceeds prf - 2|doppler centre|");
        half = std::min(half, processed_bandwidth / 2);
    }
    const double step = 1.0 - overlap_fraction;
    const double bw = 2.0 * half / (1.0 + static_cast<double>(n_bands - 1) * step);
    const double bin = meta.prf / static_cast<double>(shape.n_az);
    if (bw < 4.0 * bin - 1e-12)
        throw PlanInfeasible(std::to_string(n_bands) + " bands at overlap " + std::to_string(overlap_fraction) +
                             " give " + std::to_string(bw / bin) + " azimuth bins per band; at least 4 are needed");

    FrequencyPlan plan;
    plan.n_bands = n_bands;
    plan.bandwidth = bw;
    plan.overlap_fraction = overlap_fraction;
    plan.doppler_center = dc;
    plan.prf = meta.prf;
    plan.taper = taper;
    const double r_ref = meta.range_of(static_cast<double>(shape.n_rg) / 2.0);
    plan.doppler_rate = doppler_rate(meta, r_ref);
    const double t_mid = meta.t_start + static_cast<double>(shape.n_az) / (2.0 * meta.prf);
    for (std::size_t k = 0; k < n_bands; ++k) {
        const double c = dc - half + bw / 2 + static_cast<double>(k) * bw * step;
        plan.centers.push_back(c);
        plan.epoch_times.push_back(t_mid + (c - dc) / plan.doppler_rate);
    }
    return plan;
}

ComplexRaster band_raw(const ComplexRaster& spectrum, const FrequencyPlan& plan, std::size_t band) {
    return idft2(bandpass_azimuth(spectrum, plan.window(band)));
}

SubApertureStack decompose(const ComplexRaster& raw, const FrequencyPlan& plan) {
    plan.validate();
    if (std::abs(plan.prf - raw.meta().prf) > 1e-9 * plan.prf)
        throw PlanInfeasible("plan prf does not match the raster prf");
    const ComplexRaster spectrum = dft2(raw);

    std::vector<ComplexRaster> images(plan.n_bands);
    parallel_for(plan.n_bands, [&](std::size_t k) { images[k] = focus::focus(band_raw(spectrum, plan, k)); });

    std::vector<std::size_t> order(plan.n_bands);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return plan.epoch_times[a] < plan.epoch_times[b]; });
    SubApertureStack stack;
    stack.plan = plan;
    for (std::size_t k : order) {
        stack.images.push_back(std::move(images[k]));
        stack.band_index.push_back(k);
        stack.epoch_times.push_back(plan.epoch_times[k]);
    }
    return stack;
}

nlohmann::json plan_to_json(const FrequencyPlan& p) {
    return {{"n_bands", p.n_bands},
            {"bandwidth", p.bandwidth},
            {"overlap_fraction", p.overlap_fraction},
            {"centers", p.centers},
            {"epoch_times", p.epoch_times},
            {"doppler_center", p.doppler_center},
            {"doppler_rate", p.doppler_rate},
            {"prf", p.prf},
            {"taper", p.taper == Taper::Rect ? "rect" : "hann"}};
}

FrequencyPlan plan_from_json(const nlohmann::json& j) {
    FrequencyPlan p;
    try {
        p.n_bands = j.at("n_bands").get<std::size_t>();
        p.bandwidth = j.at("bandwidth").get<double>();
        p.overlap_fraction = j.at("overlap_fraction").get<double>();
        p.centers = j.at("centers").get<std::vector<double>>();
        p.epoch_times = j.at("epoch_times").get<std::vector<double>>();
        p.doppler_center = j.at("doppler_center").get<double>();
        p.doppler_rate = j.at("doppler_rate").get<double>();
        p.prf = j.at("prf").get<double>();
        const auto taper = j.value("taper", std::string("rect"));
        if (taper != "rect" && taper != "hann") throw FormatError("unknown taper '" + taper + "'");
        p.taper = taper == "rect" ? Taper::Rect : Taper::Hann;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("plan.json: ") + e.what());
    }
    p.validate();
    return p;
}

namespace {
std::filesystem::path band_file(const std::filesystem::path& dir, std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "band_%03zu.mmsr", i);
    return dir / name;
}
}  // namespace

void write_stack(const std::filesystem::path& dir, const SubApertureStack& stack) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < stack.size(); ++i) write_raster(band_file(dir, i), stack.images[i]);
    nlohmann::json j = plan_to_json(stack.plan);
    j["stack_band_index"] = stack.band_index;
    std::ofstream os(dir / "plan.json", std::ios::trunc);
    os << j.dump(2) << '\n';
    if (!os) throw InputError("cannot write " + (dir / "plan.json").string());
}

SubApertureStack read_stack(const std::filesystem::path& dir) {
    std::ifstream is(dir / "plan.json");
    if (!is) throw InputError("cannot open " + (dir / "plan.json").string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("plan.json: " + std::string(e.what()));
    }
    SubApertureStack stack;
    stack.plan = plan_from_json(j);
    stack.band_index = j.at("stack_band_index").get<std::vector<std::size_t>>();
    if (stack.band_index.size() != stack.plan.n_bands) throw FormatError("plan.json: stack index length mismatch");
    for (std::size_t i = 0; i < stack.band_index.size(); ++i) {
        stack.images.push_back(read_raster(band_file(dir, i)));
        stack.epoch_times.push_back(stack.plan.epoch_times.at(stack.band_index[i]));
        if (i > 0 && !(stack.epoch_times[i] > stack.epoch_times[i - 1]))
            throw FormatError("stack epochs are not strictly increasing");
        if (!stack.images[i].same_shape(stack.images[0])) throw FormatError("stack rasters differ in shape");
    }
    return stack;
}

}  // namespace mmsar::subap
