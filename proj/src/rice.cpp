#include <cmath>
#include <limits>

#include "mmsar/error.hpp"
#include "mmsar/parallel.hpp"
#include "mmsar/psinsar.hpp"

namespace mmsar::psinsar {

namespace {

// Hankel asymptotic expansion of exp(-x) I_nu(x), x large.
double bessel_asymptotic(double nu, double x) {
    const double mu = 4 * nu * nu;
    double term = 1, sum = 1;
    for (int k = 1; k <= 30; ++k) {
        const double odd = 2.0 * k - 1;
        term *= -(mu - odd * odd) / (k * 8.0 * x);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2 * kPi * x);
}

constexpr double kAsymptoticFrom = 30.0;

double xi(double theta) {
    const double t2 = theta * theta;
    const double b = (2 + t2) * bessel_i0e(t2 / 4) + t2 * bessel_i1e(t2 / 4);
    return 2 + t2 - kPi / 8 * b * b;
}

}  // namespace

double bessel_i0e(double x) {
    const double ax = std::abs(x);
    if (ax < kAsymptoticFrom) return std::cyl_bessel_i(0.0, ax) * std::exp(-ax);
    return bessel_asymptotic(0, ax);
}

double bessel_i1e(double x) {
    const double ax = std::abs(x);
    const double v = ax < kAsymptoticFrom ? std::cyl_bessel_i(1.0, ax) * std::exp(-ax) : bessel_asymptotic(1, ax);
    return x < 0 ? -v : v;
}

double rice_pdf(double a, double nu, double sigma) {
    if (!(a >= 0)) throw DomainError("Rice amplitude must be non-negative");
    if (!(sigma > 0)) throw DomainError("Rice sigma must be positive");
    if (!(nu >= 0)) throw DomainError("Rice nu must be non-negative");
    const double s2 = sigma * sigma;
    // exp(-(a^2 + nu^2)/2s^2) I0(a nu/s^2) = exp(-(a - nu)^2/2s^2) i0e(a nu/s^2)
    return a / s2 * std::exp(-(a - nu) * (a - nu) / (2 * s2)) * bessel_i0e(a * nu / s2);
}

RiceFit fit_rice(std::span<const double> amplitudes) {
    const std::size_t n = amplitudes.size();
    if (n < 8) throw InvalidInput("Rice fit needs at least 8 samples");
    double m1 = 0;
    for (double a : amplitudes) {
        if (!(a >= 0) || !std::isfinite(a)) throw DomainError("amplitudes must be finite and non-negative");
        m1 += a;
    }
    m1 /= static_cast<double>(n);
    double var = 0;
    for (double a : amplitudes) var += (a - m1) * (a - m1);
    var /= static_cast<double>(n);

    RiceFit fit;
    if (var <= 1e-24 * m1 * m1) {
        fit.nu = m1;
        fit.sigma = 0;
        fit.d_a = 0;
        fit.degenerate = true;
        return fit;
    }
    const double sd = std::sqrt(var);
    const double r = m1 / sd;
    const double bound = std::sqrt(kPi / (4 - kPi));
    // r depends on nu only at fourth order near nu = 0, so sampling noise in r alone produces
    // nu ~ 0.5 sigma from pure Rayleigh data at n = 1e4. Anything within two standard errors
    // of the Rayleigh ratio (asymptotic sd 1.359/sqrt(n) for Rayleigh samples) is treated as nu = 0.
    const double rayleigh_band = 2 * 1.3589660180721823 / std::sqrt(static_cast<double>(n));
    if (r <= bound + rayleigh_band) {
        fit.nu = 0;
        fit.sigma = std::sqrt((var + m1 * m1) / 2);
        fit.d_a = std::numeric_limits<double>::infinity();
        fit.unstable = true;
        return fit;
    }
    double theta = r - bound;
    for (int it = 0; it < 20; ++it) {
        const double next = std::sqrt(std::max(0.0, xi(theta) * (1 + r * r) - 2));
        ++fit.iterations;
        const bool done = std::abs(next - theta) < 1e-12 * std::max(1.0, theta);
        theta = next;
        if (done) break;
    }
    const double x = xi(theta);
    fit.sigma = sd / std::sqrt(x);
    fit.nu = std::sqrt(std::max(0.0, m1 * m1 + (x - 2) * fit.sigma * fit.sigma));
    if (fit.nu > 0) {
        fit.d_a = fit.sigma / fit.nu;
    } else {
        fit.d_a = std::numeric_limits<double>::infinity();
        fit.unstable = true;
    }
    return fit;
}

void SlcStack::validate() const {
    if (images.empty()) throw InvalidInput("SLC stack is empty");
    if (times_days.size() != images.size()) throw InvalidInput("SLC stack needs one time per image");
    if (master_index >= images.size()) throw InvalidInput("SLC stack master index out of range");
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].same_shape(images[0])) throw InvalidInput("SLC stack images differ in size");
        if (i > 0 && !(times_days[i] > times_days[i - 1]))
            throw InvalidInput("SLC stack times must be strictly increasing");
    }
}

double stability(const RiceFit& fit, StabilityMode mode) {
    if (mode == StabilityMode::Dispersion) return fit.d_a;
    return std::isinf(fit.d_a) ? 0.0 : 1.0 / (1.0 + fit.d_a);
}

bool passes(const RiceFit& fit, const PsConfig& cfg) {
    if (fit.degenerate) return false;
    const double s = stability(fit, cfg.mode);
    return cfg.mode == StabilityMode::Dispersion ? s <= cfg.threshold : s >= cfg.threshold;
}

std::vector<PsPoint> select_ps(const SlcStack& stack, const PsConfig& cfg) {
    stack.validate();
    if (stack.images.size() < 8) throw InvalidInput("PS selection needs at least 8 images");
    if (!std::isfinite(cfg.threshold)) throw ConfigError("stability threshold must be finite");
    const std::size_t rows = stack.images[0].n_az(), cols = stack.images[0].n_rg();
    std::vector<std::vector<PsPoint>> per_row(rows);
    parallel_for(rows, [&](std::size_t r) {
        std::vector<double> amp(stack.images.size());
        for (std::size_t c = 0; c < cols; ++c) {
            for (std::size_t k = 0; k < stack.images.size(); ++k) amp[k] = std::abs(stack.images[k](r, c));
            const RiceFit fit = fit_rice(amp);
            if (passes(fit, cfg))
                per_row[r].push_back(
                    {r * cols + c, {static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(c)}, fit});
        }
    });
    std::vector<PsPoint> out;
    for (auto& v : per_row)
        for (auto& p : v) out.push_back(p);
    return out;
}

}  // namespace mmsar::psinsar
