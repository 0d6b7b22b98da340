#include <cmath>
#include <numeric>

#include "mmsar/error.hpp"
#include "mmsar/parallel.hpp"
#include "mmsar/psinsar.hpp"

namespace mmsar::psinsar {

double flat_earth_phase(double wavelength, double b_perp, double rho, double rho0, double incidence) {
    return -4 * kPi / wavelength * b_perp * (rho - rho0) / (rho * std::tan(incidence));
}

double topographic_phase(double wavelength, double b_perp, double rho, double incidence, double h) {
    return -4 * kPi / wavelength * b_perp * h / (rho * std::sin(incidence));
}

double displacement_phase(double wavelength, double delta) { return 4 * kPi / wavelength * delta; }

double wrap_phase(double phi) {
    double w = std::remainder(phi, 2 * kPi);
    if (w <= -kPi) w += 2 * kPi;
    return w;
}

double linear_rate(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    if (n < 2 || y.size() != n) throw InvalidInput("rate needs at least two matching samples");
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double stt = 0, sty = 0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    if (!(stt > 0)) throw DomainError("rate needs distinct times");
    return sty / stt;
}

std::vector<PsSeries> phase_model(const SlcStack& stack, const std::vector<PsPoint>& ps, const PhaseModelInput& in) {
    stack.validate();
    const std::size_t n = stack.images.size();
    const std::size_t m = stack.master_index;
    const ComplexRaster& master = stack.images[m];
    const AcquisitionMeta& meta = master.meta();
    if (!(meta.wavelength > 0)) throw InvalidInput("stack metadata lacks a wavelength");
    if (!(meta.fs_rg > 0)) throw InvalidInput("stack metadata lacks a range sampling rate");
    for (std::size_t k = 0; k < n; ++k) {
        if (k == m) continue;
        if (!in.geometry.count(k)) throw ConfigError("missing geometry for image pair " + std::to_string(k));
        const double inc = in.geometry.at(k).incidence;
        if (!(inc > 0 && inc < kPi / 2)) throw ConfigError("pair incidence must lie in (0, pi/2)");
    }
    for (const auto& [k, g] : in.atmo)
        if (g.rows != master.n_az() || g.cols != master.n_rg())
            throw InvalidInput("atmospheric screen " + std::to_string(k) + " differs from the image size");
    const double rho0 = in.reference_range > 0 ? in.reference_range
                                                : meta.range_of(static_cast<double>(master.n_rg()) / 2);
    const double lambda = meta.wavelength;

    std::vector<PsSeries> out(ps.size());
    parallel_for(ps.size(), [&](std::size_t i) {
        const PsPoint& p = ps[i];
        if (p.pixel.row < 0 || p.pixel.col < 0 || static_cast<std::size_t>(p.pixel.row) >= master.n_az() ||
            static_cast<std::size_t>(p.pixel.col) >= master.n_rg())
            throw OutOfRange("PS " + std::to_string(p.id) + " lies outside the stack");
        const auto r = static_cast<std::size_t>(p.pixel.row), c = static_cast<std::size_t>(p.pixel.col);
        const double rho = meta.range_of(static_cast<double>(c));
        const auto h_it = in.heights.find(p.id);
        const double h = h_it == in.heights.end() ? 0.0 : h_it->second;

        PsSeries s;
        s.id = p.id;
        s.pixel = p.pixel;
        s.fit = p.fit;
        s.times_days = stack.times_days;
        s.components.resize(n);
        std::vector<double> residual(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == m) continue;
            const PairGeometry& g = in.geometry.at(k);
            PhaseComponents& pc = s.components[k];
            pc.observed = std::arg(stack.images[k](r, c) * std::conj(master(r, c)));
            pc.flat_earth = flat_earth_phase(lambda, g.b_perp, rho, rho0, g.incidence);
            pc.topographic = topographic_phase(lambda, g.b_perp, rho, g.incidence, h);
            const auto a_it = in.atmo.find(k);
            pc.atmospheric = a_it == in.atmo.end() ? 0.0 : a_it->second(r, c);
            residual[k] = wrap_phase(pc.observed - pc.flat_earth - pc.topographic - pc.atmospheric);
        }
        // temporal unwrapping along acquisition order, anchored at the master
        std::vector<double> u(n);
        u[0] = residual[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double step = wrap_phase(residual[k] - residual[k - 1]);
            if (std::abs(step) > kUnwrapLimit) s.reliable = false;
            u[k] = u[k - 1] + step;
        }
        const double anchor = u[m];
        s.displacement_mm.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double phi = u[k] - anchor;
            s.displacement_mm[k] = phi * lambda / (4 * kPi) * 1000.0;
            if (k == m) continue;
            PhaseComponents& pc = s.components[k];
            pc.displacement = phi;
            pc.noise = wrap_phase(pc.observed - pc.flat_earth - pc.topographic - pc.atmospheric - pc.displacement);
        }
        out[i] = std::move(s);
    });
    return out;
}

}  // namespace mmsar::psinsar
