#include "mmsar/coreg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmsar/error.hpp"
#include "mmsar/fft.hpp"
#include "mmsar/parallel.hpp"

namespace mmsar::coreg {

namespace {

using Grid = std::vector<double>;

struct Box {
    std::ptrdiff_t r0, c0;
    std::size_t rows, cols;
};

bool inside(const ComplexRaster& img, const Box& b) {
    return b.r0 >= 0 && b.c0 >= 0 && b.r0 + static_cast<std::ptrdiff_t>(b.rows) <= static_cast<std::ptrdiff_t>(img.n_az()) &&
           b.c0 + static_cast<std::ptrdiff_t>(b.cols) <= static_cast<std::ptrdiff_t>(img.n_rg());
}

std::vector<cplx> extract(const ComplexRaster& img, const Box& b) {
    std::vector<cplx> out(b.rows * b.cols);
    for (std::size_t r = 0; r < b.rows; ++r)
        for (std::size_t c = 0; c < b.cols; ++c) out[r * b.cols + c] = img(b.r0 + r, b.c0 + c);
    return out;
}

Grid abs_of(const std::vector<cplx>& v) {
    Grid out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}

// Removes the patch's mean spectral carrier (lag-one autocorrelation phase per
// axis). Amplitudes are unchanged; sub-band images sit far from zero Doppler
// and a box-periodic FFT of the raw carrier rings at the box edges.
void to_baseband(std::vector<cplx>& z, std::size_t rows, std::size_t cols) {
    cplx ar{}, ac{};
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (r + 1 < rows) ar += z[(r + 1) * cols + c] * std::conj(z[r * cols + c]);
            if (c + 1 < cols) ac += z[r * cols + c + 1] * std::conj(z[r * cols + c]);
        }
    const double wr = std::abs(ar) > 0 ? std::arg(ar) : 0.0, wc = std::abs(ac) > 0 ? std::arg(ac) : 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            z[r * cols + c] *= std::polar(1.0, -(wr * static_cast<double>(r) + wc * static_cast<double>(c)));
}

void fft2(std::vector<cplx>& a, std::size_t rows, std::size_t cols, FftDirection dir) {
    for (std::size_t r = 0; r < rows; ++r) fft_inplace(std::span<cplx>(a.data() + r * cols, cols), dir);
    std::vector<cplx> col(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) col[r] = a[r * cols + c];
        fft_inplace(col, dir);
        for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] = col[r];
    }
}

// Signed index of bin k; an even-length Nyquist bin counts as negative.
std::ptrdiff_t signed_bin(std::size_t k, std::size_t n) {
    return k < (n + 1) / 2 ? static_cast<std::ptrdiff_t>(k) : static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(n);
}

// Band-limited interpolation of a complex patch by an integer factor.
std::vector<cplx> upsample(std::vector<cplx> a, std::size_t rows, std::size_t cols, std::size_t f) {
    fft2(a, rows, cols, FftDirection::Forward);
    const std::size_t R = rows * f, C = cols * f;
    std::vector<cplx> big(R * C);
    auto place = [](std::ptrdiff_t k, std::size_t n) { return static_cast<std::size_t>((k + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n)); };
    for (std::size_t kr = 0; kr < rows; ++kr) {
        const std::ptrdiff_t sr = signed_bin(kr, rows);
        const bool nyq_r = rows % 2 == 0 && kr == rows / 2;
        for (std::size_t kc = 0; kc < cols; ++kc) {
            const std::ptrdiff_t sc = signed_bin(kc, cols);
            const bool nyq_c = cols % 2 == 0 && kc == cols / 2;
            const cplx v = a[kr * cols + kc];
            // Nyquist bins are split evenly between the +n/2 and -n/2 slots
            const std::ptrdiff_t rs[2] = {sr, -sr};
            const std::ptrdiff_t cs[2] = {sc, -sc};
            const int nr = nyq_r ? 2 : 1, nc = nyq_c ? 2 : 1;
            const double w = 1.0 / (nr * nc);
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nc; ++j) big[place(rs[i], R) * C + place(cs[j], C)] += w * v;
        }
    }
    fft2(big, R, C, FftDirection::Inverse);
    const double s = 1.0 / static_cast<double>(rows * cols);
    for (auto& v : big) v *= s;
    return big;
}

double pearson(const Grid& a, const Grid& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] - ma, y = b[i] - mb;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if (!(saa > 0) || !(sbb > 0)) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

void remove_mean(Grid& g) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    for (auto& v : g) v -= m;
}

// Circular cross-correlation sum_x T(x) S(x + s) evaluated on a fractional
// lag grid through explicit DFT kernels.
class CorrelationZoom {
public:
    CorrelationZoom(const Grid& t, const Grid& s, std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
        std::vector<cplx> ft(t.begin(), t.end()), fs(s.begin(), s.end());
        fft2(ft, rows, cols, FftDirection::Forward);
        fft2(fs, rows, cols, FftDirection::Forward);
        x_.resize(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) x_(r, c) = std::conj(ft[r * cols + c]) * fs[r * cols + c];
        x_ /= static_cast<double>(rows * cols);
    }

    // Lags (in patch samples) lag_r0 + i*step, lag_c0 + j*step for i, j < n.
    Eigen::MatrixXd surface(double lag_r0, double lag_c0, double step, std::size_t n) const {
        Eigen::MatrixXcd a(n, rows_), b(cols_, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = lag_r0 + static_cast<double>(i) * step;
            for (std::size_t k = 0; k < rows_; ++k)
                a(i, k) = std::polar(1.0, 2 * kPi * static_cast<double>(signed_bin(k, rows_)) * s / static_cast<double>(rows_));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double s = lag_c0 + static_cast<double>(j) * step;
            for (std::size_t k = 0; k < cols_; ++k)
                b(k, j) = std::polar(1.0, 2 * kPi * static_cast<double>(signed_bin(k, cols_)) * s / static_cast<double>(cols_));
        }
        return (a * x_ * b).real();
    }

private:
    std::size_t rows_, cols_;
    Eigen::MatrixXcd x_;
};

struct Peak {
    double r = 0, c = 0, value = -std::numeric_limits<double>::infinity();
};

Peak zoom_peak(const CorrelationZoom& z, double center_r, double center_c, double half, std::size_t steps_per_unit,
               double unit) {
    const double step = unit / static_cast<double>(steps_per_unit);
    const std::size_t n = 2 * static_cast<std::size_t>(std::llround(half / step)) + 1;
    const double r0 = center_r - static_cast<double>(n / 2) * step;
    const double c0 = center_c - static_cast<double>(n / 2) * step;
    const Eigen::MatrixXd s = z.surface(r0, c0, step, n);
    Peak best;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (s(i, j) > best.value) best = {r0 + static_cast<double>(i) * step, c0 + static_cast<double>(j) * step, s(i, j)};
    return best;
}

Grid block_amplitude(const ComplexRaster& img, std::size_t block, std::size_t& rows, std::size_t& cols) {
    rows = img.n_az() / block;
    cols = img.n_rg() / block;
    Grid out(rows * cols, 0.0);
    for (std::size_t r = 0; r < rows * block; ++r)
        for (std::size_t c = 0; c < cols * block; ++c) out[(r / block) * cols + c / block] += std::abs(img(r, c));
    return out;
}

std::vector<std::size_t> monomial_powers_r(std::size_t degree) {
    std::vector<std::size_t> p;
    for (std::size_t d = 0; d <= degree; ++d)
        for (std::size_t q = 0; q <= d; ++q) p.push_back(d - q);
    return p;
}

std::vector<std::size_t> monomial_powers_c(std::size_t degree) {
    std::vector<std::size_t> p;
    for (std::size_t d = 0; d <= degree; ++d)
        for (std::size_t q = 0; q <= d; ++q) p.push_back(q);
    return p;
}

struct Fit {
    std::vector<double> rg, az;
};

Fit solve_warp(const std::vector<const WarpSample*>& pts, std::size_t degree) {
    const auto pr = monomial_powers_r(degree), pc = monomial_powers_c(degree);
    const std::size_t m = pts.size(), n = pr.size();
    double sr = 1, sc = 1;
    for (const auto* p : pts) {
        sr = std::max(sr, std::abs(static_cast<double>(p->pixel.row)));
        sc = std::max(sc, std::abs(static_cast<double>(p->pixel.col)));
    }
    Eigen::MatrixXd a(m, n);
    Eigen::MatrixXd y(m, 2);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = static_cast<double>(pts[i]->pixel.row) / sr;
        const double c = static_cast<double>(pts[i]->pixel.col) / sc;
        for (std::size_t k = 0; k < n; ++k) a(i, k) = std::pow(r, pr[k]) * std::pow(c, pc[k]);
        y(i, 0) = pts[i]->offset.d_rg;
        y(i, 1) = pts[i]->offset.d_az;
    }
    // minimum-norm solution when the points do not span the basis (e.g. collinear)
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::MatrixXd x = cod.solve(y);
    Fit f;
    for (std::size_t k = 0; k < n; ++k) {
        const double scale = std::pow(sr, pr[k]) * std::pow(sc, pc[k]);
        f.rg.push_back(x(k, 0) / scale);
        f.az.push_back(x(k, 1) / scale);
    }
    return f;
}

}  // namespace

void CoregConfig::validate() const {
    if (!(corr_threshold > 0 && corr_threshold <= 1)) throw ConfigError("corr_threshold must lie in (0, 1]");
    if (oversampling < 1) throw ConfigError("oversampling must be at least 1");
    if (window_az < 4 || window_rg < 4) throw ConfigError("correlation window must be at least 4x4");
    if (skimming < 1) throw ConfigError("skimming must be at least 1");
    if (n_points < 1) throw ConfigError("n_points must be at least 1");
    if (warp_degree > 3) throw ConfigError("warp degree must not exceed 3");
    if (patch_oversampling < 1 || patch_oversampling > 8) throw ConfigError("patch_oversampling must lie in [1, 8]");
    if (use_dem) throw ConfigError("DEM-assisted coregistration is not supported");
    if (!(min_relative_amplitude >= 0 && min_relative_amplitude < 1))
        throw ConfigError("min_relative_amplitude must lie in [0, 1)");
}

nlohmann::json config_to_json(const CoregConfig& cfg) {
    return {{"n_points", cfg.n_points},
            {"corr_threshold", cfg.corr_threshold},
            {"oversampling", cfg.oversampling},
            {"window", {cfg.window_az, cfg.window_rg}},
            {"skimming", cfg.skimming},
            {"use_dem", cfg.use_dem},
            {"doppler_centroid_strategy", "polynomials"},
            {"search_radius", cfg.search_radius},
            {"patch_oversampling", cfg.patch_oversampling},
            {"warp_degree", cfg.warp_degree},
            {"pair_mode", cfg.pair_mode == subap::PairMode::Adjacent ? "adjacent" : "fixed_master"},
            {"min_separation", {cfg.min_separation_az, cfg.min_separation_rg}},
            {"min_relative_amplitude", cfg.min_relative_amplitude}};
}

CoregConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("coregistration config must be a JSON object");
    CoregConfig cfg;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n_points") cfg.n_points = v.get<std::size_t>();
            else if (key == "corr_threshold") cfg.corr_threshold = v.get<double>();
            else if (key == "oversampling") cfg.oversampling = v.get<std::size_t>();
            else if (key == "window") {
                if (v.is_array() && v.size() == 2) {
                    cfg.window_az = v[0].get<std::size_t>();
                    cfg.window_rg = v[1].get<std::size_t>();
                } else {
                    cfg.window_az = cfg.window_rg = v.get<std::size_t>();
                }
            } else if (key == "skimming") cfg.skimming = v.get<std::size_t>();
            else if (key == "use_dem") cfg.use_dem = v.get<bool>();
            else if (key == "doppler_centroid_strategy") {
                if (v.get<std::string>() != "polynomials") throw ConfigError("doppler_centroid_strategy must be \"polynomials\"");
            } else if (key == "search_radius") cfg.search_radius = v.get<std::size_t>();
            else if (key == "patch_oversampling") cfg.patch_oversampling = v.get<std::size_t>();
            else if (key == "warp_degree") cfg.warp_degree = v.get<std::size_t>();
            else if (key == "pair_mode") {
                const auto m = v.get<std::string>();
                if (m == "adjacent") cfg.pair_mode = subap::PairMode::Adjacent;
                else if (m == "fixed_master") cfg.pair_mode = subap::PairMode::FixedMaster;
                else throw ConfigError("pair_mode must be \"adjacent\" or \"fixed_master\"");
            } else if (key == "min_separation") {
                if (v.is_array() && v.size() == 2) {
                    cfg.min_separation_az = v[0].get<std::size_t>();
                    cfg.min_separation_rg = v[1].get<std::size_t>();
                } else {
                    cfg.min_separation_az = cfg.min_separation_rg = v.get<std::size_t>();
                }
            }
            else if (key == "min_relative_amplitude") cfg.min_relative_amplitude = v.get<double>();
            else throw ConfigError("unknown coregistration key: " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad coregistration config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::vector<PixelCoord> select_points(const ComplexRaster& master, const CoregConfig& cfg) {
    cfg.validate();
    if (master.n_az() < cfg.window_az || master.n_rg() < cfg.window_rg)
        throw InvalidInput("image is smaller than the correlation window");
    const std::size_t hr = cfg.window_az / 2, hc = cfg.window_rg / 2;
    const std::size_t n_rg = master.n_rg();

    std::vector<double> amp(master.data().size());
    for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::abs(master.data()[i]);
    const double floor = cfg.min_relative_amplitude * *std::max_element(amp.begin(), amp.end());

    std::vector<std::size_t> idx;
    for (std::size_t r = hr; r + hr < master.n_az(); ++r)
        for (std::size_t c = hc; c + hc < n_rg; ++c)
            if (amp[r * n_rg + c] >= floor) idx.push_back(r * n_rg + c);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return amp[a] > amp[b]; });

    std::vector<PixelCoord> out;
    const auto sep_a = static_cast<std::ptrdiff_t>(cfg.min_separation_az);
    const auto sep_r = static_cast<std::ptrdiff_t>(cfg.min_separation_rg);
    for (std::size_t rank = 0; rank < idx.size() && out.size() < cfg.n_points; rank += cfg.skimming) {
        const PixelCoord p{static_cast<std::ptrdiff_t>(idx[rank] / n_rg), static_cast<std::ptrdiff_t>(idx[rank] % n_rg)};
        if ((sep_a > 0 || sep_r > 0) && std::any_of(out.begin(), out.end(), [&](const PixelCoord& q) {
                return std::abs(q.row - p.row) < std::max<std::ptrdiff_t>(sep_a, 1) &&
                       std::abs(q.col - p.col) < std::max<std::ptrdiff_t>(sep_r, 1);
            }))
            continue;
        out.push_back(p);
    }
    return out;
}

PixelCoord coarse_offset(const ComplexRaster& master, const ComplexRaster& slave, std::size_t block) {
    if (!master.same_shape(slave)) throw InvalidInput("coarse offset needs equally sized images");
    if (block < 1) throw InvalidInput("coarse block size must be positive");
    std::size_t rows = 0, cols = 0;
    const Grid a = block_amplitude(master, block, rows, cols);
    const Grid b = block_amplitude(slave, block, rows, cols);
    if (rows < 2 || cols < 2) return {0, 0};
    const auto max_r = static_cast<std::ptrdiff_t>(rows / 8), max_c = static_cast<std::ptrdiff_t>(cols / 8);
    double best = -std::numeric_limits<double>::infinity();
    PixelCoord lag{0, 0};
    for (std::ptrdiff_t dr = -max_r; dr <= max_r; ++dr)
        for (std::ptrdiff_t dc = -max_c; dc <= max_c; ++dc) {
            Grid x, y;
            for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, -dr); r < static_cast<std::ptrdiff_t>(rows) - std::max<std::ptrdiff_t>(0, dr); ++r)
                for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, -dc); c < static_cast<std::ptrdiff_t>(cols) - std::max<std::ptrdiff_t>(0, dc); ++c) {
                    x.push_back(a[r * cols + c]);
                    y.push_back(b[(r + dr) * cols + c + dc]);
                }
            if (x.size() < 4) continue;
            const double v = pearson(x, y);
            // prefer the smaller lag on ties
            if (std::isfinite(v) && v > best + 1e-12) {
                best = v;
                lag = {dr, dc};
            }
        }
    return {lag.row * static_cast<std::ptrdiff_t>(block), lag.col * static_cast<std::ptrdiff_t>(block)};
}

OffsetSample match_patch(const ComplexRaster& master, const ComplexRaster& slave, PixelCoord at,
                         const CoregConfig& cfg, PixelCoord seed) {
    if (!master.same_shape(slave)) throw InvalidInput("master and slave must have the same shape");
    const std::size_t wa = cfg.window_az, wr = cfg.window_rg;
    const Box tbox{at.row - static_cast<std::ptrdiff_t>(wa / 2), at.col - static_cast<std::ptrdiff_t>(wr / 2), wa, wr};
    if (!inside(master, tbox)) throw OutOfRange("correlation window leaves the master image");
    const auto sr_a = static_cast<std::ptrdiff_t>(cfg.search_radius ? cfg.search_radius : wa / 2);
    const auto sr_r = static_cast<std::ptrdiff_t>(cfg.search_radius ? cfg.search_radius : wr / 2);

    const Grid ta = abs_of(extract(master, tbox));
    double best = -std::numeric_limits<double>::infinity();
    PixelCoord lag{};
    bool any = false;
    for (std::ptrdiff_t dr = -sr_a; dr <= sr_a; ++dr)
        for (std::ptrdiff_t dc = -sr_r; dc <= sr_r; ++dc) {
            const Box sbox{tbox.r0 + seed.row + dr, tbox.c0 + seed.col + dc, wa, wr};
            if (!inside(slave, sbox)) continue;
            any = true;
            const double v = pearson(ta, abs_of(extract(slave, sbox)));
            if (!std::isfinite(v)) continue;
            const bool closer = std::abs(v - best) <= 1e-12 &&
                                dr * dr + dc * dc < (lag.row - seed.row) * (lag.row - seed.row) + (lag.col - seed.col) * (lag.col - seed.col);
            if (v > best + 1e-12 || closer) {
                best = v;
                lag = {seed.row + dr, seed.col + dc};
            }
        }
    if (!any) throw OutOfRange("search window leaves the slave image");
    if (!std::isfinite(best)) return OffsetSample::from(0, 0, 0, false);

    const std::size_t f = cfg.patch_oversampling;
    const std::size_t R = wa * f, C = wr * f;
    // sin^2 taper suppresses the wrap-around edges of the circular correlation
    auto prepare = [&](std::vector<cplx> z) {
        to_baseband(z, wa, wr);
        if (f > 1) z = upsample(std::move(z), wa, wr, f);
        Grid g = abs_of(z);
        remove_mean(g);
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c) {
                const double w = std::sin(kPi * (static_cast<double>(r) + 0.5) / static_cast<double>(R)) *
                                 std::sin(kPi * (static_cast<double>(c) + 0.5) / static_cast<double>(C));
                g[r * C + c] *= w * w;
            }
        return g;
    };
    Grid tg = prepare(extract(master, tbox));
    double e_t = std::inner_product(tg.begin(), tg.end(), tg.begin(), 0.0);
    if (!(e_t > 0)) return OffsetSample::from(lag.col, lag.row, 0, false);

    // Region resampled so that sample x reads img at x + (sr, sc).
    auto shifted = [&](const ComplexRaster& img, const Box& b, double sr, double sc) {
        std::size_t mr = 16, mc = 16;
        auto grown = [&](std::size_t kr, std::size_t kc) {
            return Box{b.r0 - static_cast<std::ptrdiff_t>(kr), b.c0 - static_cast<std::ptrdiff_t>(kc), b.rows + 2 * kr,
                       b.cols + 2 * kc};
        };
        while (mr > 0 && !inside(img, grown(mr, 0))) --mr;
        while (mc > 0 && !inside(img, grown(0, mc))) --mc;
        const Box g = grown(mr, mc);
        std::vector<cplx> z = extract(img, g);
        to_baseband(z, g.rows, g.cols);
        fft2(z, g.rows, g.cols, FftDirection::Forward);
        for (std::size_t kr = 0; kr < g.rows; ++kr)
            for (std::size_t kc = 0; kc < g.cols; ++kc) {
                // real-valued ramp on even-length Nyquist bins keeps the shift symmetric
                const bool nyq = (g.rows % 2 == 0 && kr == g.rows / 2) || (g.cols % 2 == 0 && kc == g.cols / 2);
                const double ph = 2 * kPi *
                                  (static_cast<double>(signed_bin(kr, g.rows)) * sr / static_cast<double>(g.rows) +
                                   static_cast<double>(signed_bin(kc, g.cols)) * sc / static_cast<double>(g.cols));
                z[kr * g.cols + kc] *= nyq ? cplx(std::cos(ph), 0) : std::polar(1.0, ph);
            }
        fft2(z, g.rows, g.cols, FftDirection::Inverse);
        std::vector<cplx> out(wa * wr);
        const double norm = 1.0 / static_cast<double>(g.rows * g.cols);
        for (std::size_t r = 0; r < wa; ++r)
            for (std::size_t c = 0; c < wr; ++c) out[r * wr + c] = z[(r + mr) * g.cols + c + mc] * norm;
        return out;
    };

    // lags in the zoom are oversampled samples; one pixel is f samples
    const double unit = static_cast<double>(f);
    const std::size_t coarse = std::min<std::size_t>(cfg.oversampling, 16);
    const double tol = 1.0 / static_cast<double>(cfg.oversampling);
    const Box sbox{tbox.r0 + lag.row, tbox.c0 + lag.col, wa, wr};
    Peak p;
    double e_s = 0, acc_r = 0, acc_c = 0;
    // The tapered correlation is biased toward the integer lag: the residual
    // peak recovers only a fraction g of the remaining offset (g near 0.4 on
    // compact point responses). The estimate is refined by resampling until
    // the residual vanishes, stepping by residual / g with g from the last two
    // iterates. Each side moves by half so that swapping master and slave
    // negates the result.
    struct Axis {
        double acc = 0, last_acc = 0, last_d = 0;
        bool primed = false;
        void step(double d) {
            double s = d;
            if (primed && std::abs(acc - last_acc) > 1e-9) {
                const double g = (last_d - d) / (acc - last_acc);
                if (g > 0.05 && g < 2) s = d / g;
            }
            last_acc = acc;
            last_d = d;
            primed = true;
            acc += std::clamp(s, -1.0, 1.0);
        }
    } ar, ac;
    for (int iter = 0; iter < 12; ++iter) {
        acc_r = ar.acc;
        acc_c = ac.acc;
        if (iter > 0) {
            tg = prepare(shifted(master, tbox, -acc_r / 2, -acc_c / 2));
            e_t = std::inner_product(tg.begin(), tg.end(), tg.begin(), 0.0);
        }
        const Grid sg = prepare(iter == 0 ? extract(slave, sbox) : shifted(slave, sbox, acc_r / 2, acc_c / 2));
        e_s = std::inner_product(sg.begin(), sg.end(), sg.begin(), 0.0);
        if (!(e_t > 0) || !(e_s > 0)) return OffsetSample::from(lag.col, lag.row, 0, false);
        const CorrelationZoom zoom(tg, sg, R, C);
        p = zoom_peak(zoom, 0, 0, unit, coarse, unit);
        if (cfg.oversampling > coarse)
            p = zoom_peak(zoom, p.r, p.c, unit / static_cast<double>(coarse), cfg.oversampling, unit);
        const double dr = p.r / unit, dc = p.c / unit;
        if (std::abs(dr) < tol && std::abs(dc) < tol) break;
        ar.step(dr);
        ac.step(dc);
        if (std::abs(ar.acc) > 2 || std::abs(ac.acc) > 2) break;
    }

    const double corr = std::clamp(p.value / std::sqrt(e_t * e_s), -1.0, 1.0);
    return OffsetSample::from(static_cast<double>(lag.col) + acc_c, static_cast<double>(lag.row) + acc_r, corr,
                              corr >= cfg.corr_threshold);
}

std::size_t warp_terms(std::size_t degree) { return (degree + 1) * (degree + 2) / 2; }

std::array<double, 2> WarpModel::operator()(double row, double col) const {
    const auto pr = monomial_powers_r(degree), pc = monomial_powers_c(degree);
    std::array<double, 2> d{0, 0};
    for (std::size_t k = 0; k < pr.size() && k < coef_rg.size(); ++k) {
        const double m = std::pow(row, pr[k]) * std::pow(col, pc[k]);
        d[0] += coef_rg[k] * m;
        d[1] += coef_az[k] * m;
    }
    return d;
}

WarpModel fit_warp(const std::vector<WarpSample>& samples, std::size_t degree) {
    if (degree > 3) throw InvalidInput("warp degree must not exceed 3");
    const std::size_t terms = warp_terms(degree);
    std::vector<const WarpSample*> in;
    for (const auto& s : samples)
        if (s.offset.valid && std::isfinite(s.offset.d_rg) && std::isfinite(s.offset.d_az)) in.push_back(&s);
    if (in.size() < terms) throw Underdetermined("too few valid samples for the warp polynomial");

    WarpModel m;
    m.degree = degree;
    auto refit = [&] {
        Fit f = solve_warp(in, degree);
        m.coef_rg = std::move(f.rg);
        m.coef_az = std::move(f.az);
    };
    auto residual2 = [&](const WarpSample& s) {
        const auto d = m(static_cast<double>(s.pixel.row), static_cast<double>(s.pixel.col));
        const double er = s.offset.d_rg - d[0], ea = s.offset.d_az - d[1];
        return er * er + ea * ea;
    };
    auto rms_of = [&](const std::vector<const WarpSample*>& pts) {
        double acc = 0;
        for (const auto* p : pts) acc += residual2(*p);
        return std::sqrt(acc / static_cast<double>(pts.size()));
    };

    refit();
    for (int iter = 0; iter < 3; ++iter) {
        const double rms = rms_of(in);
        if (rms < 1e-12) break;
        std::vector<const WarpSample*> keep;
        for (const auto* p : in)
            if (std::sqrt(residual2(*p)) <= 3 * rms) keep.push_back(p);
        if (keep.size() == in.size() || keep.size() < terms) break;
        const auto previous = in;
        in = std::move(keep);
        try {
            refit();
        } catch (const Underdetermined&) {
            in = previous;
            refit();
            break;
        }
    }
    m.residual_rms = rms_of(in);
    m.used = in.size();
    std::size_t valid = 0;
    for (const auto& s : samples) valid += s.offset.valid ? 1 : 0;
    m.rejected = valid - in.size();
    return m;
}

TrackResult track(const subap::SubApertureStack& stack, const CoregConfig& cfg) {
    cfg.validate();
    if (stack.size() < 2) throw InvalidInput("tracking needs at least two sub-aperture images");
    const std::vector<PixelCoord> pts = select_points(stack.master(), cfg);
    const std::size_t n_pairs = stack.size() - 1, n_pts = pts.size();
    auto pair_of = [&](std::size_t k) {
        return cfg.pair_mode == subap::PairMode::Adjacent ? std::pair{k, k + 1} : std::pair{std::size_t{0}, k + 1};
    };

    std::vector<PixelCoord> seeds(n_pairs);
    parallel_for(n_pairs, [&](std::size_t k) {
        const auto [a, b] = pair_of(k);
        seeds[k] = coarse_offset(stack.images[a], stack.images[b]);
    });

    std::vector<OffsetSample> raw(n_pairs * n_pts);
    parallel_for(n_pairs * n_pts, [&](std::size_t i) {
        const std::size_t k = i / n_pts, p = i % n_pts;
        const auto [a, b] = pair_of(k);
        try {
            raw[i] = match_patch(stack.images[a], stack.images[b], pts[p], cfg, seeds[k]);
        } catch (const OutOfRange&) {
            raw[i] = OffsetSample::from(0, 0, 0, false);
        }
    });

    TrackResult result;
    std::vector<OffsetSample> resid(raw.size());
    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::vector<WarpSample> ws(n_pts);
        for (std::size_t p = 0; p < n_pts; ++p) ws[p] = {pts[p], raw[k * n_pts + p]};
        WarpModel w;
        bool fitted = false;
        for (std::size_t deg = cfg.warp_degree + 1; deg-- > 0 && !fitted;) {
            try {
                w = fit_warp(ws, deg);
                fitted = true;
            } catch (const Underdetermined&) {
            }
        }
        if (!fitted) w = WarpModel{0, {0.0}, {0.0}, 0, 0, 0};
        for (std::size_t p = 0; p < n_pts; ++p) {
            const auto& o = raw[k * n_pts + p];
            const auto d = w(static_cast<double>(pts[p].row), static_cast<double>(pts[p].col));
            resid[k * n_pts + p] = o.valid ? OffsetSample::from(o.d_rg - d[0], o.d_az - d[1], o.peak_corr, true)
                                           : OffsetSample::from(0, 0, o.peak_corr, false);
        }
        result.warps.push_back(std::move(w));
    }

    for (std::size_t p = 0; p < n_pts; ++p) {
        OffsetSeries s;
        s.point_id = p;
        s.pixel = pts[p];
        s.band_index = stack.band_index;
        s.epochs = stack.epoch_times;
        s.samples.push_back(OffsetSample::from(0, 0, 1, true));
        double cum_rg = 0, cum_az = 0;
        std::size_t invalid = 0;
        for (std::size_t k = 0; k < n_pairs; ++k) {
            const auto& r = resid[k * n_pts + p];
            invalid += r.valid ? 0 : 1;
            if (cfg.pair_mode == subap::PairMode::Adjacent) {
                cum_rg += r.d_rg;
                cum_az += r.d_az;
                s.samples.push_back(OffsetSample::from(cum_rg, cum_az, r.peak_corr, r.valid));
            } else {
                s.samples.push_back(r);
            }
        }
        if (2 * invalid > n_pairs) {
            ++result.dropped_points;
            continue;
        }
        result.series.push_back(std::move(s));
    }
    return result;
}

}  // namespace mmsar::coreg
