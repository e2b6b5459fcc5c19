#include "trackimpute/geo.hpp"

#include <cmath>
#include <numbers>

#include "trackimpute/error.hpp"

namespace trackimpute {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

bool is_valid(const GeoPoint& p) noexcept {
    return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

PlanarPoint to_planar(const GeoPoint& p, const GeoPoint& origin) noexcept {
    const double cos_lat0 = std::cos(origin.lat * kDegToRad);
    return {(p.lon - origin.lon) * cos_lat0 * kMetersPerDegree, (p.lat - origin.lat) * kMetersPerDegree};
}

GeoPoint to_geo(const PlanarPoint& p, const GeoPoint& origin) noexcept {
    const double cos_lat0 = std::cos(origin.lat * kDegToRad);
    return {origin.lon + p.x / (cos_lat0 * kMetersPerDegree), origin.lat + p.y / kMetersPerDegree};
}

GeoPoint centroid(std::span<const GeoPoint> points) {
    if (points.empty()) {
        throw ValidationError("centroid of an empty point set");
    }
    double lon = 0.0;
    double lat = 0.0;
    for (const auto& p : points) {
        lon += p.lon;
        lat += p.lat;
    }
    const auto n = static_cast<double>(points.size());
    return {lon / n, lat / n};
}

double distance(const PlanarPoint& p, const PlanarPoint& q) noexcept {
    return std::hypot(q.x - p.x, q.y - p.y);
}

double angle_to(const PlanarPoint& from, const PlanarPoint& to) noexcept {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    if (dx == 0.0 && dy == 0.0) {
        return 0.0;
    }
    const double a = std::atan2(dy, dx);
    // atan2 returns -pi for (negative x, -0.0); fold onto the half-open range.
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

}  // namespace trackimpute
