#pragma once

#include <array>

#include "trackimpute/movement.hpp"
#include "trackimpute/types.hpp"

namespace trackimpute {

/// Second-order Taylor moments of Z = (cos th*, sin th*) for th* ~ Normal(theta, sigma_psi_sq).
struct TaylorMoments {
    std::array<double, 2> mu_z{};
    /// Symmetric 2x2 covariance, row-major: {xx, xy, yx, yy}.
    std::array<double, 4> sigma_z{};
};

/// Angular-noise variance above which the Taylor step density is a poor approximation.
inline constexpr double kTaylorValidityCap = 1.0;

TaylorMoments taylor_moments(double theta, double sigma_psi_sq) noexcept;

/// Closed-form determinant of sigma_z: sigma_psi^6 / 2, independent of theta.
double taylor_covariance_det(double sigma_psi_sq) noexcept;

/// Natural-log density.
struct LogLik {
    double value = 0.0;
    /// Steps whose sigma_psi^2 exceeded kTaylorValidityCap.
    int taylor_cap_exceeded = 0;
};

/// Joint log-density of the two segment endpoints about their receivers.
double logp0(const PlanarPoint& x1, const PlanarPoint& xT, const Receiver& r1, const Receiver& rT,
             double sigma_r_sq) noexcept;

/// Approximate log-density of the step landing at `x_t`.
/// |D| and sigma_psi^2 are clamped at floors.step_length_m and floors.angular_variance.
double logp1(const PlanarPoint& x_t, const PlanarPoint& x_prev, double D, double theta, double sigma_psi_sq,
             const Floors& floors = {}) noexcept;

/// Log-density of the signed step-length draw D.
double logp2(double D, double d, int t, int T, double phi, const Floors& floors = {}) noexcept;

/// Endpoint term plus one step term per interior day. Throws InconsistentDrawError
/// if the stored latents do not reproduce the positions.
LogLik segment_loglik(const SegmentDraw& draw, const ModelParams& params, const Floors& floors = {});

/// Sum over segments. Throws InconsistentDrawError if consecutive segments do not share endpoints.
LogLik trajectory_loglik(const TrajectoryDraw& draw, const Floors& floors = {});

/// Scores the draw under its own parameters and stores the value on it.
LogLik score(TrajectoryDraw& draw, const Floors& floors = {});

}  // namespace trackimpute
