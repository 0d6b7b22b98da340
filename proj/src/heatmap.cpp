#include "mmsar/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "mmsar/error.hpp"

namespace mmsar::report {

double percentile(std::vector<double> values, double p) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }), values.end());
    if (values.empty()) throw RenderError("no finite values for a percentile");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

GrayImage to_gray(const RealGrid& values, HeatScale scale) {
    if (values.rows == 0 || values.cols == 0 || values.values.size() != values.rows * values.cols)
        throw RenderError("heatmap grid is empty");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values.values)
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (lo > hi) throw RenderError("heatmap grid has no finite values");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw RenderError("heatmap grid holds infinite values");
    if (scale == HeatScale::Quantile) {
        const double q1 = percentile(values.values, 1), q99 = percentile(values.values, 99);
        // a span collapsed by ties falls back to the full range
        if (q99 > q1) {
            lo = q1;
            hi = q99;
        }
    }
    GrayImage img{values.rows, values.cols, std::vector<std::uint16_t>(values.values.size(), 0)};
    for (std::size_t i = 0; i < values.values.size(); ++i) {
        const double v = values.values[i];
        if (std::isnan(v)) continue;
        if (!(hi > lo)) {
            img.levels[i] = 32768;
            continue;
        }
        const double u = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        img.levels[i] = static_cast<std::uint16_t>(std::lround(u * 65535.0));
    }
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RenderError("cannot write " + path.string());
    out << "P5\n" << img.cols << ' ' << img.rows << "\n65535\n";
    for (std::uint16_t v : img.levels) {
        const char b[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
        out.write(b, 2);
    }
    if (!out) throw RenderError("write failed for " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string magic;
    std::size_t cols = 0, rows = 0, maxval = 0;
    in >> magic >> cols >> rows >> maxval;
    if (magic != "P5" || maxval != 65535 || !in) throw FormatError(path.string() + ": not a 16-bit binary PGM");
    in.get();
    GrayImage img{rows, cols, std::vector<std::uint16_t>(rows * cols)};
    for (auto& v : img.levels) {
        unsigned char b[2];
        if (!in.read(reinterpret_cast<char*>(b), 2)) throw FormatError(path.string() + ": truncated PGM");
        v = static_cast<std::uint16_t>((b[0] << 8) | b[1]);
    }
    return img;
}

void render_heatmap(const RealGrid& values, const std::filesystem::path& out_path, HeatScale scale) {
    write_pgm(out_path, to_gray(values, scale));
}

RealGrid energy_grid(const modal::VibrationMap& map, std::size_t rows, std::size_t cols) {
    RealGrid g(rows, cols, std::numeric_limits<double>::quiet_NaN());
    for (const auto& p : map.points) {
        if (p.pixel.row < 0 || p.pixel.col < 0 || static_cast<std::size_t>(p.pixel.row) >= rows ||
            static_cast<std::size_t>(p.pixel.col) >= cols)
            continue;
        g(static_cast<std::size_t>(p.pixel.row), static_cast<std::size_t>(p.pixel.col)) = p.energy;
    }
    return g;
}

}  // namespace mmsar::report
