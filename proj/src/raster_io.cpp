#include "mmsar/raster_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mmsar/error.hpp"

namespace mmsar {

static_assert(std::endian::native == std::endian::little, "MMSR I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated MMSR header: " + path.string());
    return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
    auto p = raster_path;
    p += ".json";
    return p;
}

nlohmann::json meta_to_json(const AcquisitionMeta& m) {
    return {{"prf", m.prf},
            {"fs_rg", m.fs_rg},
            {"wavelength", m.wavelength},
            {"v_p", m.v_p},
            {"L", m.L},
            {"incidence", m.incidence},
            {"gamma", m.gamma},
            {"t_start", m.t_start},
            {"doppler_center", m.doppler_center},
            {"near_range", m.near_range},
            {"chirp_bandwidth", m.chirp_bandwidth},
            {"chirp_duration", m.chirp_duration}};
}

AcquisitionMeta meta_from_json(const nlohmann::json& j) {
    AcquisitionMeta m;
    try {
        m.prf = j.at("prf").get<double>();
        m.fs_rg = j.at("fs_rg").get<double>();
        m.wavelength = j.at("wavelength").get<double>();
        m.v_p = j.at("v_p").get<double>();
        m.L = j.at("L").get<double>();
        m.incidence = j.at("incidence").get<double>();
        m.gamma = j.at("gamma").get<double>();
        m.t_start = j.value("t_start", 0.0);
        m.doppler_center = j.value("doppler_center", 0.0);
        m.near_range = j.value("near_range", 0.0);
        m.chirp_bandwidth = j.value("chirp_bandwidth", 0.0);
        m.chirp_duration = j.value("chirp_duration", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("acquisition metadata: ") + e.what());
    }
    return m;
}

void write_raster(const std::filesystem::path& path, const ComplexRaster& img) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw InputError("cannot open for writing: " + path.string());
        os.write("MMSR", 4);
        put<std::uint32_t>(os, kMmsrVersion);
        put<std::uint64_t>(os, img.n_az());
        put<std::uint64_t>(os, img.n_rg());
        std::vector<float> buf(2 * img.n_rg());
        for (std::size_t r = 0; r < img.n_az(); ++r) {
            auto row = img.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                buf[2 * c] = static_cast<float>(row[c].real());
                buf[2 * c + 1] = static_cast<float>(row[c].imag());
            }
            os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
        }
        if (!os) throw InputError("write failed: " + path.string());
    }
    std::ofstream js(sidecar_path(path), std::ios::trunc);
    js << meta_to_json(img.meta()).dump(2) << '\n';
    if (!js) throw InputError("write failed: " + sidecar_path(path).string());
}

ComplexRaster read_raster(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open raster: " + path.string());
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), 4) || std::memcmp(magic.data(), "MMSR", 4) != 0)
        throw FormatError("not an MMSR raster (bad magic): " + path.string());
    const auto version = get<std::uint32_t>(is, path);
    if (version != kMmsrVersion) throw FormatError("unsupported MMSR version " + std::to_string(version));
    const auto n_az = get<std::uint64_t>(is, path);
    const auto n_rg = get<std::uint64_t>(is, path);
    if (n_az < 2 || n_rg < 2 || n_az > (1u << 24) || n_rg > (1u << 24))
        throw FormatError("implausible MMSR dimensions in " + path.string());

    std::vector<cplx> data(n_az * n_rg);
    std::vector<float> buf(2 * n_rg);
    for (std::size_t r = 0; r < n_az; ++r) {
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float))))
            throw FormatError("truncated MMSR payload: " + path.string());
        for (std::size_t c = 0; c < n_rg; ++c) data[r * n_rg + c] = {buf[2 * c], buf[2 * c + 1]};
    }

    AcquisitionMeta meta;
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        std::ifstream js(side);
        nlohmann::json j;
        try {
            js >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("bad sidecar " + side.string() + ": " + e.what());
        }
        meta = meta_from_json(j);
    }
    return ComplexRaster(n_az, n_rg, std::move(data), meta);
}

ComplexRaster quantize_f32(const ComplexRaster& img) {
    ComplexRaster out = img;
    // interleaved doubles; a per-element complex loop drops the odd tail under g++ 11 -O2
    double* p = reinterpret_cast<double*>(out.data().data());
    for (std::size_t i = 0; i < 2 * out.size(); ++i) p[i] = static_cast<double>(static_cast<float>(p[i]));
    return out;
}

}  // namespace mmsar
