#include "trackimpute/movement.hpp"

#include <algorithm>
#include <cmath>

#include "trackimpute/error.hpp"
#include "trackimpute/geo.hpp"

namespace trackimpute {

StepLengthLaw step_length_law(double d, int t, int T, double phi, const Floors& floors) {
    const double base = std::max(d, floors.distance_m);
    const double log_var = std::clamp(phi * std::log(base), std::log(floors.variance_m2),
                                      std::log(floors.variance_ceiling_m2));
    return {d / static_cast<double>(T - (t - 1)), std::exp(log_var)};
}

PlanarPoint sample_endpoint(const Receiver& receiver, double sigma_r_sq, Rng& rng, bool enforce) {
    if (!(sigma_r_sq >= 0.0)) {
        throw ValidationError("endpoint variance must be nonnegative");
    }
    if (sigma_r_sq == 0.0) {
        return receiver.position;
    }
    const double sd = std::sqrt(sigma_r_sq);
    auto draw = [&] {
        const double dx = sd * standard_normal(rng);
        const double dy = sd * standard_normal(rng);
        return PlanarPoint{receiver.position.x + dx, receiver.position.y + dy};
    };
    if (!enforce) {
        return draw();
    }
    // P(||N - R|| <= r) for an isotropic Gaussian is the Rayleigh CDF.
    const double r = receiver.radius_m;
    const double acceptance = -std::expm1(-r * r / (2.0 * sigma_r_sq));
    if (acceptance < 1e-6) {
        throw SimulationError("endpoint acceptance probability " + std::to_string(acceptance) +
                              " below 1e-6 for receiver '" + receiver.id + "'");
    }
    while (true) {
        const auto p = draw();
        if (distance(p, receiver.position) <= r) {
            return p;
        }
    }
}

double remaining_distance(const PlanarPoint& x_prev, const PlanarPoint& x_star, double r,
                          RemainingDistanceMode mode, double eps_d) {
    const double a = distance(x_prev, x_star);
    switch (mode) {
        case RemainingDistanceMode::Literal:
            return std::max(a - 2.0 * r, a);
        case RemainingDistanceMode::Adjusted:
            return std::max(a - 2.0 * r, eps_d);
    }
    return a;
}

double sigma_psi_sq(int t, int n, const ModelParams& params, Rng& rng) {
    if (n <= params.beta) {
        return params.gamma * std::exp(params.alpha * static_cast<double>(n - (t - 1)));
    }
    return params.gamma * open_uniform(rng);
}

PlanarPoint advance(const PlanarPoint& x_prev, const StepLatents& latents) noexcept {
    const double len = std::abs(latents.dist_draw);
    const double heading = latents.theta + latents.psi;
    return {x_prev.x + len * std::cos(heading), x_prev.y + len * std::sin(heading)};
}

namespace {

bool inside_any(const PlanarPoint& p, std::span<const Receiver> network) {
    return std::any_of(network.begin(), network.end(),
                       [&](const Receiver& r) { return distance(p, r.position) <= r.radius_m; });
}

}  // namespace

std::pair<PlanarPoint, StepLatents> sample_step(const PlanarPoint& x_prev, const PlanarPoint& x_star, int t,
                                                int T, const ModelParams& params,
                                                const SimulationOptions& options, Rng& rng) {
    StepLatents lat;
    lat.t = t;
    lat.coincident = x_prev == x_star;
    lat.theta = angle_to(x_prev, x_star);
    lat.d_remaining = remaining_distance(x_prev, x_star, params.r_m, options.mode, options.floors.distance_m);
    lat.sigma_psi_sq = sigma_psi_sq(t, T - 2, params, rng);

    const auto law = step_length_law(lat.d_remaining, t, T, params.phi, options.floors);
    const double d_sd = std::sqrt(law.variance);
    const double psi_sd = std::sqrt(lat.sigma_psi_sq);

    const int attempts = options.reject_interior_in_range ? std::max(options.interior_retry_cap, 1) : 1;
    PlanarPoint next;
    for (int i = 0; i < attempts; ++i) {
        lat.dist_draw = law.mean + d_sd * standard_normal(rng);
        lat.psi = psi_sd * standard_normal(rng);
        next = advance(x_prev, lat);
        if (!options.reject_interior_in_range || !inside_any(next, options.network)) {
            lat.range_violation = false;
            return {next, lat};
        }
        lat.range_violation = true;
    }
    return {next, lat};
}

SegmentDraw impute_segment_from(const PlanarPoint& start, const SegmentSpec& spec, const ModelParams& params,
                                const SimulationOptions& options, Rng& rng) {
    if (spec.T < 2) {
        throw ValidationError("segment length T must be at least 2");
    }
    SegmentDraw draw;
    draw.spec = spec;
    draw.positions.resize(static_cast<std::size_t>(spec.T));
    draw.latents.reserve(static_cast<std::size_t>(spec.T - 2));
    draw.positions.front() = start;
    const PlanarPoint x_star =
        sample_endpoint(spec.end_receiver, params.sigma_r_sq, rng, options.enforce_endpoint_radius);
    draw.positions.back() = x_star;
    for (int t = 2; t <= spec.T - 1; ++t) {
        auto [pos, lat] = sample_step(draw.positions[static_cast<std::size_t>(t - 2)], x_star, t, spec.T,
                                      params, options, rng);
        draw.positions[static_cast<std::size_t>(t - 1)] = pos;
        draw.latents.push_back(lat);
    }
    return draw;
}

SegmentDraw impute_segment(const SegmentSpec& spec, const ModelParams& params, const SimulationOptions& options,
                           Rng& rng) {
    const PlanarPoint start =
        sample_endpoint(spec.start_receiver, params.sigma_r_sq, rng, options.enforce_endpoint_radius);
    return impute_segment_from(start, spec, params, options, rng);
}

TrajectoryDraw impute_trajectory(std::span<const SegmentSpec> specs, const ModelParams& params,
                                 const SimulationOptions& options, Rng& rng) {
    if (specs.empty()) {
        throw ValidationError("cannot impute a trajectory without segments");
    }
    TrajectoryDraw traj;
    traj.params = params;
    traj.segments.reserve(specs.size());
    traj.segments.push_back(impute_segment(specs.front(), params, options, rng));
    for (std::size_t k = 1; k < specs.size(); ++k) {
        const PlanarPoint start = traj.segments.back().positions.back();
        traj.segments.push_back(impute_segment_from(start, specs[k], params, options, rng));
    }
    return traj;
}

double max_replay_error(const SegmentDraw& draw) {
    double worst = 0.0;
    for (std::size_t i = 0; i < draw.latents.size() && i + 1 < draw.positions.size(); ++i) {
        const auto replay = advance(draw.positions[i], draw.latents[i]);
        worst = std::max(worst, distance(replay, draw.positions[i + 1]));
    }
    return worst;
}

bool is_consistent(const SegmentDraw& draw) {
    const auto T = static_cast<std::size_t>(draw.spec.T);
    if (draw.spec.T < 2 || draw.positions.size() != T || draw.latents.size() != T - 2) {
        return false;
    }
    double scale = 1.0;
    for (const auto& p : draw.positions) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            return false;
        }
        scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    }
    for (std::size_t i = 0; i < draw.latents.size(); ++i) {
        if (draw.latents[i].t != static_cast<int>(i) + 2) {
            return false;
        }
        scale = std::max(scale, std::abs(draw.latents[i].dist_draw));
    }
    return max_replay_error(draw) <= 1e-9 + 1e-12 * scale;
}

}  // namespace trackimpute
