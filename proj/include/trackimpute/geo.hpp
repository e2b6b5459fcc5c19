#pragma once

#include <span>

#include "trackimpute/types.hpp"

namespace trackimpute {

/// Meters per degree of latitude on the spherical Earth used by the local projection.
inline constexpr double kMetersPerDegree = 111320.0;

bool is_valid(const GeoPoint& p) noexcept;

/// Local equirectangular projection about `origin`.
PlanarPoint to_planar(const GeoPoint& p, const GeoPoint& origin) noexcept;

/// Inverse of to_planar for the same origin.
GeoPoint to_geo(const PlanarPoint& p, const GeoPoint& origin) noexcept;

/// Arithmetic mean of the points' lon/lat; throws ValidationError when empty.
GeoPoint centroid(std::span<const GeoPoint> points);

double distance(const PlanarPoint& p, const PlanarPoint& q) noexcept;

/// Heading from `from` to `to` in (-pi, pi]. Coincident points yield 0.
double angle_to(const PlanarPoint& from, const PlanarPoint& to) noexcept;

}  // namespace trackimpute
