#ifndef MMSAR_MODAL_HPP
#define MMSAR_MODAL_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mmsar/offsets.hpp"
#include "mmsar/raster.hpp"

namespace mmsar::modal {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Structural model M y'' + C y' + K y = f with M x M matrices.
struct ModalSystem {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd damping;
    Eigen::MatrixXd stiffness;

    std::size_t n_dof() const { return static_cast<std::size_t>(mass.rows()); }
    /// Throws InvalidInput unless M is SPD, K symmetric PSD, C symmetric, all M x M.
    void validate() const;

    static ModalSystem sdof(double m, double c, double k);
};

/// Z(w) = -w^2 M + j w C + K.
CMatrix dynamic_stiffness(const ModalSystem& sys, double omega);

struct FrequencyResponse {
    std::vector<double> omegas;  // rad/s
    std::vector<CMatrix> H;      // empty matrix where singular
    std::vector<bool> singular;
};

inline constexpr double kSingularCondition = 1e12;

/// H(w) = Z(w)^-1 per grid point. Points with cond(Z) >= 1e12 are flagged
/// singular; an all-singular grid throws DegenerateGrid.
FrequencyResponse frequency_response(const ModalSystem& sys, const std::vector<double>& omegas);

/// Solves Z(w) y = f. Throws ResonanceError when Z is singular.
CVector forced_response(const ModalSystem& sys, const CVector& f, double omega);

struct PointVibration {
    std::size_t point_id = 0;
    PixelCoord pixel;
    double energy = 0;                    // px^2
    std::optional<double> dominant_freq;  // Hz, absent when energy is zero
    std::vector<cplx> spectrum;           // unitary DFT of d_rg + j d_az, bin order
    std::vector<cplx> spectrum_rg;        // unitary DFT of d_rg alone
    std::vector<cplx> spectrum_az;        // unitary DFT of d_az alone
    std::size_t interpolated = 0;         // invalid epochs filled by interpolation
};

struct VibrationMap {
    std::vector<PointVibration> points;
    std::vector<double> freqs;  // Hz per bin, signed
    double epoch_spacing = 0;   // s
    std::size_t skipped = 0;    // points with too few valid epochs
};

/// Removes mean and linear trend in place (least squares against t).
void detrend(std::vector<double>& x, const std::vector<double>& t);

/// Per-point energy and dominant frequency of the detrended complex series.
/// Invalid epochs are linearly interpolated from valid neighbours; points with
/// fewer than `min_valid` valid epochs are skipped. Series must share one
/// uniform epoch grid.
VibrationMap vibration_map(const std::vector<OffsetSeries>& series, std::size_t min_valid = 4);

struct Anomaly {
    std::size_t point_id = 0;
    PixelCoord pixel;
    double energy = 0;
    double z_score = 0;
    std::optional<double> dominant_freq;
};

struct AnomalyReport {
    std::vector<Anomaly> anomalies;  // z descending
    double threshold = 3;
    double median = 0;
    double mad = 0;
    bool degenerate = false;
};

/// (x - median) / (1.4826 MAD). Empty when MAD is zero.
std::vector<double> robust_z(const std::vector<double>& values);

AnomalyReport detect_anomalies(const VibrationMap& map, double z_threshold = 3);

/// One-sided averaged magnitude spectrum over positive bins (DC excluded).
struct AveragedSpectrum {
    std::vector<double> omegas;  // rad/s
    std::vector<double> magnitude;
};

AveragedSpectrum averaged_spectrum(const VibrationMap& map);

struct ModalFit {
    ModalSystem system;  // unit modal mass: K = diag(w^2), C = diag(2 zeta w)
    std::vector<double> omega_n;
    std::vector<double> zeta;
    std::vector<double> amplitude;
    double r_squared = 0;
    double residual_rms = 0;
    std::vector<double> cost_trace;  // per accepted iteration
};

/// Magnitude model sum_m A_m |1 / (w_m^2 - w^2 + 2 j zeta_m w_m w)|.
double sdof_sum_magnitude(const std::vector<double>& omega_n, const std::vector<double>& zeta,
                          const std::vector<double>& amplitude, double omega);

/// Levenberg-Marquardt fit of `model_order` SDOF magnitudes. Throws FitFailed
/// (message carries the cost trace) on non-convergence, R^2 < 0.9 or any
/// zeta >= 1/sqrt(2).
ModalFit fit_spectrum(const std::vector<double>& omegas, const std::vector<double>& magnitude,
                      std::size_t model_order);

/// Fit against the averaged spectrum of the series under a flat unit force spectrum.
ModalFit fit_modal_params(const std::vector<OffsetSeries>& series, std::size_t model_order);

}  // namespace mmsar::modal

#endif
