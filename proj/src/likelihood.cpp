#include "trackimpute/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trackimpute/error.hpp"

namespace trackimpute {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace

TaylorMoments taylor_moments(double theta, double sigma_psi_sq) noexcept {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double v = sigma_psi_sq;
    const double shrink = 1.0 - 0.5 * v;
    const double off = v * (-s * c + 0.5 * s * c * v);
    return {{shrink * c, shrink * s}, {v * (s * s + 0.5 * c * c * v), off, off, v * (c * c + 0.5 * s * s * v)}};
}

double taylor_covariance_det(double sigma_psi_sq) noexcept {
    return 0.5 * sigma_psi_sq * sigma_psi_sq * sigma_psi_sq;
}

double logp0(const PlanarPoint& x1, const PlanarPoint& xT, const Receiver& r1, const Receiver& rT,
             double sigma_r_sq) noexcept {
    const double q1 = (x1.x - r1.position.x) * (x1.x - r1.position.x) + (x1.y - r1.position.y) * (x1.y - r1.position.y);
    const double qT = (xT.x - rT.position.x) * (xT.x - rT.position.x) + (xT.y - rT.position.y) * (xT.y - rT.position.y);
    return -2.0 * (kLog2Pi + std::log(sigma_r_sq)) - (q1 + qT) / (2.0 * sigma_r_sq);
}

double logp1(const PlanarPoint& x_t, const PlanarPoint& x_prev, double D, double theta, double sigma_psi_sq,
             const Floors& floors) noexcept {
    const double len = std::max(std::abs(D), floors.step_length_m);
    const double v = std::max(sigma_psi_sq, floors.angular_variance);
    const auto m = taylor_moments(theta, v);

    // Residual scaled by 1/|D| so the quadratic form uses sigma_z directly.
    const double rx = (x_t.x - x_prev.x) / len - m.mu_z[0];
    const double ry = (x_t.y - x_prev.y) / len - m.mu_z[1];

    // sigma_z^{-1} = adj(sigma_z) / det, with the closed-form determinant.
    const double det = taylor_covariance_det(v);
    const double quad = (m.sigma_z[3] * rx * rx - 2.0 * m.sigma_z[1] * rx * ry + m.sigma_z[0] * ry * ry) / det;

    // log|D^2 sigma_z| = log(D^4 v^3 / 2)
    const double log_det = 4.0 * std::log(len) + 3.0 * std::log(v) - std::numbers::ln2;
    return -kLog2Pi - 0.5 * log_det - 0.5 * quad;
}

double logp2(double D, double d, int t, int T, double phi, const Floors& floors) noexcept {
    const auto law = step_length_law(d, t, T, phi, floors);
    const double z = D - law.mean;
    return -0.5 * (kLog2Pi + std::log(law.variance)) - 0.5 * z * z / law.variance;
}

LogLik segment_loglik(const SegmentDraw& draw, const ModelParams& params, const Floors& floors) {
    if (!is_consistent(draw)) {
        throw InconsistentDrawError("segment " + std::to_string(draw.spec.k) + " of fish '" + draw.spec.fish_id +
                                    "' does not reproduce its positions from its latents");
    }
    const int T = draw.spec.T;
    LogLik out;
    out.value = logp0(draw.positions.front(), draw.positions.back(), draw.spec.start_receiver,
                      draw.spec.end_receiver, params.sigma_r_sq);
    for (std::size_t i = 0; i < draw.latents.size(); ++i) {
        const auto& lat = draw.latents[i];
        out.value += logp1(draw.positions[i + 1], draw.positions[i], lat.dist_draw, lat.theta, lat.sigma_psi_sq,
                           floors);
        out.value += logp2(lat.dist_draw, lat.d_remaining, lat.t, T, params.phi, floors);
        if (lat.sigma_psi_sq > kTaylorValidityCap) {
            ++out.taylor_cap_exceeded;
        }
    }
    return out;
}

LogLik trajectory_loglik(const TrajectoryDraw& draw, const Floors& floors) {
    if (draw.segments.empty()) {
        throw InconsistentDrawError("trajectory has no segments");
    }
    LogLik total;
    for (std::size_t k = 0; k < draw.segments.size(); ++k) {
        const auto seg = segment_loglik(draw.segments[k], draw.params, floors);
        if (k > 0 && !(draw.segments[k].positions.front() == draw.segments[k - 1].positions.back())) {
            throw InconsistentDrawError("segment " + std::to_string(k + 1) +
                                        " does not start at the previous segment's end point");
        }
        total.value += seg.value;
        total.taylor_cap_exceeded += seg.taylor_cap_exceeded;
    }
    return total;
}

LogLik score(TrajectoryDraw& draw, const Floors& floors) {
    auto ll = trajectory_loglik(draw, floors);
    draw.loglik = ll.value;
    return ll;
}

}  // namespace trackimpute
