#include "mmsar/raster.hpp"

#include <cmath>
#include <string>

#include "mmsar/error.hpp"

namespace mmsar {

double AcquisitionMeta::illuminated_span() const { return L / std::sin(gamma); }

void AcquisitionMeta::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw InvalidMeta(std::string("acquisition meta: ") + what);
    };
    need(prf > 0, "prf must be > 0");
    need(fs_rg > 0, "fs_rg must be > 0");
    need(wavelength > 0, "wavelength must be > 0");
    need(v_p > 0, "v_p must be > 0");
    need(L > 0, "L must be > 0");
    need(incidence > 0 && incidence < kPi / 2, "incidence must lie in (0, pi/2)");
    need(gamma > 0 && gamma <= kPi / 2 + 1e-12, "gamma must lie in (0, pi/2]");
    need(near_range >= 0, "near_range must be >= 0");
    need(chirp_bandwidth >= 0 && chirp_duration >= 0, "chirp parameters must be >= 0");
}

ComplexRaster::ComplexRaster(std::size_t n_az, std::size_t n_rg, AcquisitionMeta meta)
    : ComplexRaster(n_az, n_rg, std::vector<cplx>(n_az * n_rg), meta) {}

ComplexRaster::ComplexRaster(std::size_t n_az, std::size_t n_rg, std::vector<cplx> data, AcquisitionMeta meta)
    : n_az_(n_az), n_rg_(n_rg), data_(std::move(data)), meta_(meta) {
    if (n_az < 2 || n_rg < 2)
        throw InvalidInput("raster dimensions must be at least 2x2, got " + std::to_string(n_az) + "x" +
                           std::to_string(n_rg));
    if (data_.size() != n_az * n_rg) throw InvalidInput("raster data length does not match n_az*n_rg");
}

double ComplexRaster::energy() const {
    double e = 0;
    for (const auto& v : data_) e += std::norm(v);
    return e;
}

RealGrid amplitude(const ComplexRaster& img) {
    RealGrid g(img.n_az(), img.n_rg());
    for (std::size_t i = 0; i < img.size(); ++i) g.values[i] = std::abs(img.data()[i]);
    return g;
}

}  // namespace mmsar
