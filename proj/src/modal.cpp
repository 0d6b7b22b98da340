#include "mmsar/modal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"
#include "mmsar/parallel.hpp"

namespace mmsar::modal {

namespace {

bool symmetric(const Eigen::MatrixXd& a) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Largest over smallest singular value; infinite when Z is exactly singular.
double condition(const CMatrix& z) {
    Eigen::JacobiSVD<CMatrix> svd(z);
    const auto& s = svd.singularValues();
    const double lo = s(s.size() - 1);
    if (!(lo > 0)) return std::numeric_limits<double>::infinity();
    return s(0) / lo;
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
    return 0.5 * (lo + hi);
}

// Linear interpolation of invalid samples; ends hold the nearest valid value.
std::vector<double> fill_invalid(const std::vector<double>& x, const std::vector<bool>& ok,
                                 const std::vector<double>& t) {
    std::vector<double> out = x;
    const std::size_t n = x.size();
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < n; ++i)
        if (ok[i]) valid.push_back(i);
    for (std::size_t i = 0; i < n; ++i) {
        if (ok[i]) continue;
        const auto next = std::lower_bound(valid.begin(), valid.end(), i);
        if (next == valid.begin()) {
            out[i] = x[*next];
        } else if (next == valid.end()) {
            out[i] = x[valid.back()];
        } else {
            const std::size_t a = *(next - 1), b = *next;
            const double w = (t[i] - t[a]) / (t[b] - t[a]);
            out[i] = (1 - w) * x[a] + w * x[b];
        }
    }
    return out;
}

std::vector<cplx> unitary_dft(std::vector<cplx> x) {
    fft_inplace(x, FftDirection::Forward);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : x) v *= s;
    return x;
}

// Parameters per mode: ln w, ln zeta, ln A.
struct ModeParams {
    std::vector<double> w, z, a;
};

ModeParams unpack(const Eigen::VectorXd& p) {
    ModeParams m;
    for (Eigen::Index i = 0; i < p.size(); i += 3) {
        m.w.push_back(std::exp(p(i)));
        m.z.push_back(std::exp(p(i + 1)));
        m.a.push_back(std::exp(p(i + 2)));
    }
    return m;
}

Eigen::VectorXd residuals(const Eigen::VectorXd& p, const std::vector<double>& om, const std::vector<double>& y) {
    const ModeParams m = unpack(p);
    Eigen::VectorXd r(static_cast<Eigen::Index>(om.size()));
    for (std::size_t i = 0; i < om.size(); ++i)
        r(static_cast<Eigen::Index>(i)) = sdof_sum_magnitude(m.w, m.z, m.a, om[i]) - y[i];
    return r;
}

std::string trace_text(const std::vector<double>& trace) {
    std::ostringstream os;
    os << "cost trace:";
    for (double c : trace) os << ' ' << c;
    return os.str();
}

}  // namespace

void ModalSystem::validate() const {
    const auto n = mass.rows();
    if (n == 0 || mass.cols() != n || damping.rows() != n || damping.cols() != n || stiffness.rows() != n ||
        stiffness.cols() != n)
        throw InvalidInput("modal system matrices must all be M x M with M > 0");
    if (!mass.allFinite() || !damping.allFinite() || !stiffness.allFinite())
        throw InvalidInput("modal system matrices must be finite");
    if (!symmetric(mass) || !symmetric(damping) || !symmetric(stiffness))
        throw InvalidInput("modal system matrices must be symmetric");
    if (Eigen::LLT<Eigen::MatrixXd>(mass).info() != Eigen::Success)
        throw InvalidInput("mass matrix is not positive definite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, stiffness.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-12 * scale)
        throw InvalidInput("stiffness matrix is not positive semidefinite");
}

ModalSystem ModalSystem::sdof(double m, double c, double k) {
    ModalSystem s;
    s.mass = Eigen::MatrixXd::Constant(1, 1, m);
    s.damping = Eigen::MatrixXd::Constant(1, 1, c);
    s.stiffness = Eigen::MatrixXd::Constant(1, 1, k);
    return s;
}

CMatrix dynamic_stiffness(const ModalSystem& sys, double omega) {
    sys.validate();
    const cplx jw(0, omega);
    CMatrix z = sys.stiffness.cast<cplx>();
    z += (-omega * omega) * sys.mass.cast<cplx>();
    z += jw * sys.damping.cast<cplx>();
    return z;
}

FrequencyResponse frequency_response(const ModalSystem& sys, const std::vector<double>& omegas) {
    if (omegas.empty()) throw InvalidInput("frequency grid is empty");
    sys.validate();
    FrequencyResponse fr;
    fr.omegas = omegas;
    fr.H.resize(omegas.size());
    fr.singular.assign(omegas.size(), false);
    std::size_t n_singular = 0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!std::isfinite(omegas[i])) throw InvalidInput("frequency grid contains a non-finite value");
        const CMatrix z = dynamic_stiffness(sys, omegas[i]);
        if (condition(z) >= kSingularCondition) {
            fr.singular[i] = true;
            ++n_singular;
            continue;
        }
        fr.H[i] = z.fullPivLu().inverse();
    }
    if (n_singular == omegas.size()) throw DegenerateGrid("Z(w) is singular at every grid frequency");
    return fr;
}

CVector forced_response(const ModalSystem& sys, const CVector& f, double omega) {
    const CMatrix z = dynamic_stiffness(sys, omega);
    if (f.size() != z.rows()) throw InvalidInput("force vector length differs from the system size");
    if (condition(z) >= kSingularCondition)
        throw ResonanceError("dynamic stiffness is singular at w = " + std::to_string(omega));
    const Eigen::FullPivLU<CMatrix> lu(z);
    CVector y = lu.solve(f);
    // one step of iterative refinement
    y += lu.solve(f - z * y);
    return y;
}

void detrend(std::vector<double>& x, const std::vector<double>& t) {
    const std::size_t n = x.size();
    if (n == 0) return;
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double stt = 0, stx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        stx += (t[i] - tm) * (x[i] - xm);
    }
    const double slope = stt > 0 ? stx / stt : 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] -= xm + slope * (t[i] - tm);
}

VibrationMap vibration_map(const std::vector<OffsetSeries>& series, std::size_t min_valid) {
    VibrationMap map;
    if (series.empty()) return map;
    const std::vector<double>& t = series.front().epochs;
    const std::size_t n = t.size();
    if (n < 2) throw InvalidInput("offset series need at least two epochs");
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0)) throw InvalidInput("epochs must be strictly increasing");
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(t[k] - (t.front() + static_cast<double>(k) * dt)) > 1e-6 * dt)
            throw InvalidInput("epochs are not uniformly spaced");
    for (const auto& s : series) {
        if (s.epochs.size() != n || s.samples.size() != n)
            throw InvalidInput("offset series do not share one epoch grid");
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(s.epochs[k] - t[k]) > 1e-6 * dt)
                throw InvalidInput("offset series do not share one epoch grid");
    }
    map.epoch_spacing = dt;
    for (std::size_t k = 0; k < n; ++k) map.freqs.push_back(bin_frequency(k, n, 1.0 / dt));

    const std::size_t need = std::max<std::size_t>(min_valid, 2);
    std::vector<std::optional<PointVibration>> out(series.size());
    parallel_for(series.size(), [&](std::size_t i) {
        const OffsetSeries& s = series[i];
        if (s.valid_count() < need) return;
        std::vector<double> rg(n), az(n);
        std::vector<bool> ok(n);
        for (std::size_t k = 0; k < n; ++k) {
            rg[k] = s.samples[k].d_rg;
            az[k] = s.samples[k].d_az;
            ok[k] = s.samples[k].valid;
        }
        PointVibration pv;
        pv.point_id = s.point_id;
        pv.pixel = s.pixel;
        pv.interpolated = n - s.valid_count();
        if (pv.interpolated > 0) {
            rg = fill_invalid(rg, ok, t);
            az = fill_invalid(az, ok, t);
        }
        detrend(rg, t);
        detrend(az, t);
        std::vector<cplx> z(n), zr(n), za(n);
        for (std::size_t k = 0; k < n; ++k) {
            z[k] = {rg[k], az[k]};
            zr[k] = rg[k];
            za[k] = az[k];
        }
        pv.spectrum = unitary_dft(std::move(z));
        pv.spectrum_rg = unitary_dft(std::move(zr));
        pv.spectrum_az = unitary_dft(std::move(za));
        double best = -1;
        std::size_t arg = 0;
        for (std::size_t k = 1; k < n; ++k) {
            const double p = std::norm(pv.spectrum[k]);
            pv.energy += p;
            if (p > best) {
                best = p;
                arg = k;
            }
        }
        if (pv.energy > 1e-24) pv.dominant_freq = std::abs(map.freqs[arg]);
        out[i] = std::move(pv);
    });
    for (auto& o : out) {
        if (o)
            map.points.push_back(std::move(*o));
        else
            ++map.skipped;
    }
    return map;
}

std::vector<double> robust_z(const std::vector<double>& values) {
    if (values.empty()) return {};
    const double med = median_of(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
    const double mad = median_of(dev);
    if (!(mad > 0)) return {};
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - med) / (1.4826 * mad);
    return z;
}

AnomalyReport detect_anomalies(const VibrationMap& map, double z_threshold) {
    if (map.points.size() < 8) throw InvalidInput("anomaly detection needs at least 8 points");
    if (!std::isfinite(z_threshold)) throw InvalidInput("z threshold must be finite");
    AnomalyReport rep;
    rep.threshold = z_threshold;
    std::vector<double> e;
    for (const auto& p : map.points) e.push_back(p.energy);
    rep.median = median_of(e);
    std::vector<double> dev;
    for (double v : e) dev.push_back(std::abs(v - rep.median));
    rep.mad = median_of(dev);
    const std::vector<double> z = robust_z(e);
    if (z.empty()) {
        rep.degenerate = true;
        return rep;
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!(z[i] > z_threshold)) continue;
        const auto& p = map.points[i];
        rep.anomalies.push_back({p.point_id, p.pixel, p.energy, z[i], p.dominant_freq});
    }
    std::stable_sort(rep.anomalies.begin(), rep.anomalies.end(),
                     [](const Anomaly& a, const Anomaly& b) { return a.z_score > b.z_score; });
    return rep;
}

AveragedSpectrum averaged_spectrum(const VibrationMap& map) {
    if (map.points.empty()) throw InvalidInput("vibration map has no points");
    const std::size_t n = map.freqs.size();
    AveragedSpectrum out;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        double acc = 0;
        for (const auto& p : map.points) {
            double pw = std::norm(p.spectrum[k]);
            if (n - k != k) pw += std::norm(p.spectrum[n - k]);
            acc += std::sqrt(pw);
        }
        out.omegas.push_back(2 * kPi * std::abs(map.freqs[k]));
        out.magnitude.push_back(acc / static_cast<double>(map.points.size()));
    }
    return out;
}

double sdof_sum_magnitude(const std::vector<double>& omega_n, const std::vector<double>& zeta,
                          const std::vector<double>& amplitude, double omega) {
    double s = 0;
    for (std::size_t m = 0; m < omega_n.size(); ++m) {
        const cplx d(omega_n[m] * omega_n[m] - omega * omega, 2 * zeta[m] * omega_n[m] * omega);
        s += amplitude[m] / std::abs(d);
    }
    return s;
}

ModalFit fit_spectrum(const std::vector<double>& omegas, const std::vector<double>& magnitude,
                      std::size_t model_order) {
    const std::size_t n = omegas.size();
    if (model_order == 0) throw InvalidInput("model order must be at least 1");
    if (magnitude.size() != n) throw InvalidInput("spectrum and frequency grid differ in length");
    if (n < 3 * model_order + 1) throw InvalidInput("too few spectral bins for the model order");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(omegas[i] > 0) || !std::isfinite(omegas[i]) || (i > 0 && !(omegas[i] > omegas[i - 1])))
            throw InvalidInput("fit frequencies must be positive and increasing");
        if (!(magnitude[i] >= 0) || !std::isfinite(magnitude[i]))
            throw InvalidInput("spectrum magnitudes must be finite and non-negative");
    }

    // Initial guesses from the strongest local maxima and their half-power widths.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 || magnitude[i] > magnitude[i - 1];
        const bool right = i + 1 == n || magnitude[i] >= magnitude[i + 1];
        if (left && right && magnitude[i] > 0) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](std::size_t a, std::size_t b) { return magnitude[a] > magnitude[b]; });
    if (peaks.size() < model_order)
        throw FitFailed("spectrum has fewer peaks than requested modes; " + trace_text({}));
    peaks.resize(model_order);
    std::sort(peaks.begin(), peaks.end());

    Eigen::VectorXd p(static_cast<Eigen::Index>(3 * model_order));
    for (std::size_t m = 0; m < model_order; ++m) {
        const std::size_t i = peaks[m];
        const double half = magnitude[i] / std::sqrt(2.0);
        auto crossing = [&](int dir) -> std::optional<double> {
            for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + dir; j >= 0 && j < static_cast<std::ptrdiff_t>(n);
                 j += dir) {
                const auto ju = static_cast<std::size_t>(j);
                if (magnitude[ju] < half) {
                    const std::size_t k = ju - static_cast<std::size_t>(dir);
                    const double w = (magnitude[k] - half) / (magnitude[k] - magnitude[ju]);
                    return omegas[k] + w * (omegas[ju] - omegas[k]);
                }
            }
            return std::nullopt;
        };
        const auto lo = crossing(-1), hi = crossing(+1);
        double width = 0;
        if (lo && hi)
            width = *hi - *lo;
        else if (lo)
            width = 2 * (omegas[i] - *lo);
        else if (hi)
            width = 2 * (*hi - omegas[i]);
        const double wn = omegas[i];
        const double z0 = std::clamp(width > 0 ? width / (2 * wn) : 0.05, 1e-3, 0.5);
        const auto b = static_cast<Eigen::Index>(3 * m);
        p(b) = std::log(wn);
        p(b + 1) = std::log(z0);
        p(b + 2) = std::log(magnitude[i] * 2 * z0 * wn * wn);
    }

    Eigen::VectorXd r = residuals(p, omegas, magnitude);
    double cost = r.squaredNorm();
    std::vector<double> trace{cost};
    double lambda = 1e-3;
    bool converged = false;
    const Eigen::Index np = p.size();
    for (int it = 0; it < 500 && !converged; ++it) {
        Eigen::MatrixXd J(static_cast<Eigen::Index>(n), np);
        for (Eigen::Index k = 0; k < np; ++k) {
            const double h = 1e-6;
            Eigen::VectorXd pp = p, pm = p;
            pp(k) += h;
            pm(k) -= h;
            J.col(k) = (residuals(pp, omegas, magnitude) - residuals(pm, omegas, magnitude)) / (2 * h);
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool accepted = false;
        while (!accepted && lambda < 1e12) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = A.ldlt().solve(-g);
            const Eigen::VectorXd cand = p + step;
            const Eigen::VectorXd rc = residuals(cand, omegas, magnitude);
            const double cc = rc.squaredNorm();
            if (std::isfinite(cc) && cc < cost) {
                const double rel = (cost - cc) / std::max(cost, 1e-300);
                p = cand;
                r = rc;
                cost = cc;
                trace.push_back(cost);
                lambda = std::max(lambda / 3, 1e-12);
                accepted = true;
                if (rel < 1e-12 || step.norm() < 1e-10) converged = true;
            } else {
                lambda *= 4;
            }
        }
        // no descent direction left: a local minimum
        if (!accepted) converged = true;
        if (cost == 0) converged = true;
    }
    if (!converged) throw FitFailed("modal fit did not converge; " + trace_text(trace));

    const ModeParams m = unpack(p);
    const double mean = std::accumulate(magnitude.begin(), magnitude.end(), 0.0) / static_cast<double>(n);
    double ss_tot = 0;
    for (double v : magnitude) ss_tot += (v - mean) * (v - mean);
    ModalFit fit;
    fit.r_squared = ss_tot > 0 ? 1 - cost / ss_tot : (cost == 0 ? 1.0 : 0.0);
    fit.residual_rms = std::sqrt(cost / static_cast<double>(n));
    fit.cost_trace = trace;
    if (fit.r_squared < 0.9)
        throw FitFailed("modal fit R^2 = " + std::to_string(fit.r_squared) + " below 0.9; " + trace_text(trace));
    for (double z : m.z)
        if (z >= 1 / std::sqrt(2.0))
            throw FitFailed("fitted damping ratio " + std::to_string(z) + " has no resonance peak; " +
                            trace_text(trace));

    std::vector<std::size_t> order(model_order);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.w[a] < m.w[b]; });
    const auto M = static_cast<Eigen::Index>(model_order);
    fit.system.mass = Eigen::MatrixXd::Identity(M, M);
    fit.system.damping = Eigen::MatrixXd::Zero(M, M);
    fit.system.stiffness = Eigen::MatrixXd::Zero(M, M);
    for (std::size_t k = 0; k < model_order; ++k) {
        const std::size_t i = order[k];
        fit.omega_n.push_back(m.w[i]);
        fit.zeta.push_back(m.z[i]);
        fit.amplitude.push_back(m.a[i]);
        const auto kk = static_cast<Eigen::Index>(k);
        fit.system.stiffness(kk, kk) = m.w[i] * m.w[i];
        fit.system.damping(kk, kk) = 2 * m.z[i] * m.w[i];
    }
    return fit;
}

ModalFit fit_modal_params(const std::vector<OffsetSeries>& series, std::size_t model_order) {
    const VibrationMap map = vibration_map(series);
    if (model_order > map.points.size()) throw InvalidInput("model order exceeds the number of usable points");
    const AveragedSpectrum spec = averaged_spectrum(map);
    return fit_spectrum(spec.omegas, spec.magnitude, model_order);
}

}  // namespace mmsar::modal
