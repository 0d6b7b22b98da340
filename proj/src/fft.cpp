#include "mmsar/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "mmsar/error.hpp"

namespace mmsar {
namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
// Plans are cached for the process lifetime and created unaligned so any
// std::vector storage can be passed to them.
struct PlanKey {
    int rank, n0, n1, howmany, stride, dist, sign;
    auto tie() const { return std::tie(rank, n0, n1, howmany, stride, dist, sign); }
    bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_plan(const PlanKey& key, cplx* data) {
    std::lock_guard lock(plan_mutex);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = nullptr;
    if (key.rank == 2) {
        p = fftw_plan_dft_2d(key.n0, key.n1, buf, buf, key.sign, flags);
    } else {
        int n = key.n0;
        p = fftw_plan_many_dft(1, &n, key.howmany, buf, nullptr, key.stride, key.dist, buf, nullptr, key.stride,
                               key.dist, key.sign, flags);
    }
    if (!p) throw NumericError("fftw planning failed");
    plan_cache.emplace(key, p);
    return p;
}

int sign_of(FftDirection dir) { return dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD; }

void execute(const PlanKey& key, cplx* data) {
    fftw_plan p = get_plan(key, data);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, buf, buf);
}

ComplexRaster unitary_2d(const ComplexRaster& in, FftDirection dir) {
    if (in.n_az() < 2 || in.n_rg() < 2) throw InvalidInput("2D DFT needs at least 2x2 samples");
    ComplexRaster out = in;
    const PlanKey key{2, static_cast<int>(in.n_az()), static_cast<int>(in.n_rg()), 1, 1, 0, sign_of(dir)};
    execute(key, out.data().data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
    for (auto& v : out.data()) v *= scale;
    return out;
}

}  // namespace

void fft_inplace(std::span<cplx> data, FftDirection dir) {
    if (data.empty()) return;
    execute({1, static_cast<int>(data.size()), 0, 1, 1, 0, sign_of(dir)}, data.data());
}

void fft_rows(ComplexRaster& img, FftDirection dir) {
    const int n = static_cast<int>(img.n_rg());
    execute({1, n, 0, static_cast<int>(img.n_az()), 1, n, sign_of(dir)}, img.data().data());
}

void fft_cols(ComplexRaster& img, FftDirection dir) {
    const int n = static_cast<int>(img.n_az());
    const int cols = static_cast<int>(img.n_rg());
    execute({1, n, 0, cols, cols, 1, sign_of(dir)}, img.data().data());
}

ComplexRaster dft2(const ComplexRaster& img) { return unitary_2d(img, FftDirection::Forward); }

ComplexRaster idft2(const ComplexRaster& spec) { return unitary_2d(spec, FftDirection::Inverse); }

double bin_frequency(std::size_t k, std::size_t n, double fs) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    return (k < (n + 1) / 2 ? kk : kk - nn) * fs / nn;
}

}  // namespace mmsar
