#pragma once

#include <span>
#include <utility>
#include <vector>

#include "trackimpute/random.hpp"
#include "trackimpute/types.hpp"

namespace trackimpute {

/// How the remaining distance d is derived from ||X* - X_{t-1}||.
enum class RemainingDistanceMode {
    /// max(a - 2r, a), which is always a for r > 0.
    Literal,
    /// max(a - 2r, eps_d): the distance left once both detection radii are removed.
    Adjusted,
};

/// Numerical floors and ceilings that keep degenerate steps finite.
struct Floors {
    double distance_m = 1.0;            // eps_d
    double variance_m2 = 1e-6;          // eps_v, lower bound on d^phi
    double variance_ceiling_m2 = 1e12;  // upper bound on d^phi
    double step_length_m = 1e-3;        // eps_D, |D| clamp in the step density
    double angular_variance = 1e-12;    // eps_psi, sigma_psi^2 clamp in the step density
};

struct SimulationOptions {
    RemainingDistanceMode mode = RemainingDistanceMode::Literal;
    Floors floors;
    /// Rejection-sample endpoint draws until they fall inside the receiver radius.
    bool enforce_endpoint_radius = false;
    /// Redraw interior steps that land inside any receiver of `network`.
    bool reject_interior_in_range = false;
    int interior_retry_cap = 1000;
    std::span<const Receiver> network;
};

/// Mean and variance of the signed step length D at step t.
struct StepLengthLaw {
    double mean = 0.0;
    double variance = 0.0;
};

/// D ~ Normal(d / (T - (t-1)), d^phi) with d^phi clamped to
/// [floors.variance_m2, floors.variance_ceiling_m2]; the power uses max(d, eps_d).
StepLengthLaw step_length_law(double d, int t, int T, double phi, const Floors& floors);

/// Isotropic bivariate normal draw around the receiver. With `enforce` set the
/// draw is repeated until it lies within the receiver radius; throws
/// SimulationError if that acceptance probability is below 1e-6.
PlanarPoint sample_endpoint(const Receiver& receiver, double sigma_r_sq, Rng& rng, bool enforce = false);

double remaining_distance(const PlanarPoint& x_prev, const PlanarPoint& x_star, double r,
                          RemainingDistanceMode mode, double eps_d = 1.0);

/// Angular-noise variance at step t of a gap with n unobserved days.
/// Deterministic gamma*exp(alpha*(n-(t-1))) when n <= beta, otherwise gamma*U with
/// a fresh U ~ Uniform(0,1) per call.
double sigma_psi_sq(int t, int n, const ModelParams& params, Rng& rng);

/// Applies one step of the walk from `x_prev` given the step's latents.
PlanarPoint advance(const PlanarPoint& x_prev, const StepLatents& latents) noexcept;

std::pair<PlanarPoint, StepLatents> sample_step(const PlanarPoint& x_prev, const PlanarPoint& x_star, int t,
                                                int T, const ModelParams& params,
                                                const SimulationOptions& options, Rng& rng);

/// Draws both endpoints (start first) and then the interior days.
SegmentDraw impute_segment(const SegmentSpec& spec, const ModelParams& params,
                           const SimulationOptions& options, Rng& rng);

/// Same as impute_segment but reuses `start` instead of drawing it.
SegmentDraw impute_segment_from(const PlanarPoint& start, const SegmentSpec& spec, const ModelParams& params,
                                const SimulationOptions& options, Rng& rng);

/// Chains segments so that each one starts where the previous ended.
TrajectoryDraw impute_trajectory(std::span<const SegmentSpec> specs, const ModelParams& params,
                                 const SimulationOptions& options, Rng& rng);

/// Largest distance between a stored position and its replay from the stored latents.
double max_replay_error(const SegmentDraw& draw);

/// Structural checks plus the latent replay, with tolerance scaled to the coordinates.
bool is_consistent(const SegmentDraw& draw);

}  // namespace trackimpute
