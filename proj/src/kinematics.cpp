#include <cmath>
#include <numeric>

#include "mmsar/error.hpp"
#include "mmsar/psinsar.hpp"

namespace mmsar::psinsar {

namespace {

void difference(const std::vector<double>& y, const std::vector<double>& t, std::vector<double>& dy,
                std::vector<double>& mid) {
    dy.resize(y.size() - 1);
    mid.resize(y.size() - 1);
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
        dy[k] = (y[k + 1] - y[k]) / (t[k + 1] - t[k]);
        mid[k] = 0.5 * (t[k] + t[k + 1]);
    }
}

}  // namespace

KinematicsRow kinematics(const std::vector<double>& disp_mm, const std::vector<double>& times_yr) {
    const std::size_t n = disp_mm.size();
    if (times_yr.size() != n) throw InvalidInput("displacement and time series differ in length");
    if (n < 4) throw InvalidInput("kinematics needs at least 4 epochs");
    for (std::size_t k = 1; k < n; ++k) {
        if (times_yr[k] == times_yr[k - 1]) throw DomainError("repeated timestamp in displacement series");
        if (!(times_yr[k] > times_yr[k - 1])) throw InvalidInput("times must be strictly increasing");
    }
    KinematicsRow row;
    row.displacement = disp_mm;
    std::vector<double> t1, t2, t3;
    difference(disp_mm, times_yr, row.velocity, t1);
    difference(row.velocity, t1, row.acceleration, t2);
    difference(row.acceleration, t2, row.jerk, t3);
    row.mean_velocity = linear_rate(times_yr, disp_mm);
    row.mean_acceleration = std::accumulate(row.acceleration.begin(), row.acceleration.end(), 0.0) /
                            static_cast<double>(row.acceleration.size());
    return row;
}

InversionResult find_inversion_lines(const std::vector<std::vector<ProfilePoint>>& profiles) {
    InversionResult res;
    for (const auto& prof : profiles)
        for (const auto& p : prof) {
            if (!std::isfinite(p.value)) throw InvalidInput("profile values must be finite");
            if (p.value > 0) ++res.n_positive;
            if (p.value < 0) ++res.n_negative;
        }
    if (res.n_positive == 0 || res.n_negative == 0) {
        res.single_sign = true;
        return res;
    }
    for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
        const auto& prof = profiles[pi];
        std::ptrdiff_t last = -1;
        for (std::size_t k = 0; k < prof.size(); ++k) {
            if (prof[k].value == 0) continue;
            if (last >= 0) {
                const auto& a = prof[static_cast<std::size_t>(last)];
                const auto& b = prof[k];
                if ((a.value > 0) != (b.value > 0)) {
                    Crossing c;
                    c.profile = pi;
                    c.left_index = static_cast<std::size_t>(last);
                    c.right_index = k;
                    c.left_id = a.id;
                    c.right_id = b.id;
                    c.fraction = a.value / (a.value - b.value);
                    c.position = a.position + c.fraction * (b.position - a.position);
                    res.crossings.push_back(c);
                }
            }
            last = static_cast<std::ptrdiff_t>(k);
        }
    }
    return res;
}

}  // namespace mmsar::psinsar
