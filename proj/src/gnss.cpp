#include <cmath>
#include <limits>
#include <numeric>

#include "mmsar/error.hpp"
#include "mmsar/psinsar.hpp"

namespace mmsar::psinsar {

double great_circle_distance(GeoPoint a, GeoPoint b) {
    const double d2r = kPi / 180.0;
    const double p1 = a.lat_deg * d2r, p2 = b.lat_deg * d2r;
    const double dp = p2 - p1, dl = (b.lon_deg - a.lon_deg) * d2r;
    const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(h)));
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw InvalidInput("correlation inputs differ in length");
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0) || !(syy > 0)) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

ComparisonReport compare_gnss(const std::vector<PsVelocity>& ps, const std::vector<GnssRecord>& gnss,
                              double max_dist) {
    if (!(max_dist > 0)) throw InvalidInput("maximum pairing distance must be positive");
    ComparisonReport rep;
    rep.max_distance = max_dist;
    for (std::size_t g = 0; g < gnss.size(); ++g) {
        double best = std::numeric_limits<double>::infinity();
        const PsVelocity* hit = nullptr;
        for (const auto& p : ps) {
            const double d = great_circle_distance(gnss[g].pos, p.pos);
            if (d < best || (d == best && hit && p.id < hit->id)) {
                best = d;
                hit = &p;
            }
        }
        if (!hit || best > max_dist) {
            ++rep.skipped;
            continue;
        }
        rep.pairs.push_back({g, hit->id, best, gnss[g].velocity, hit->velocity});
    }
    std::vector<double> a, b;
    for (const auto& p : rep.pairs) {
        a.push_back(p.gnss_velocity);
        b.push_back(p.ps_velocity);
    }
    rep.correlation = pearson(a, b);
    return rep;
}

nlohmann::json report_to_json(const ComparisonReport& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"gnss_index", p.gnss_index},
                         {"ps_id", p.ps_id},
                         {"distance_m", p.distance_m},
                         {"gnss_velocity_mm_yr", p.gnss_velocity},
                         {"ps_velocity_mm_yr", p.ps_velocity}});
    nlohmann::json j{{"pairs", pairs}, {"skipped", r.skipped}, {"max_distance_m", r.max_distance}};
    j["correlation"] = std::isfinite(r.correlation) ? nlohmann::json(r.correlation) : nlohmann::json(nullptr);
    return j;
}

}  // namespace mmsar::psinsar
