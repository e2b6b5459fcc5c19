#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trackimpute/movement.hpp"
#include "trackimpute/random.hpp"
#include "trackimpute/types.hpp"

namespace trackimpute {

/// Prior hyperparameters. Log-normal pairs are the mean and variance of the
/// underlying normal on the log scale; the inverse gamma uses shape and scale.
struct PriorConfig {
    double alpha_shape = 10.0;
    double alpha_rate = 10.0;
    double phi_logmean = 0.5;
    double phi_logvar = 100.0;
    double gamma_logmean = 2.0;
    double gamma_logvar = 1.0;
    double sigma_r_shape = 3.0;
    double sigma_r_scale = 0.00298;
    int beta_fixed = 3;

    friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

/// Throws ValidationError on non-positive hyperparameters or negative beta.
void validate(const PriorConfig& config);

ModelParams sample_params(const PriorConfig& config, double r_m, Rng& rng);

struct BootstrapSettings {
    std::size_t n_iter = 5000;
    double keep_frac = 0.9;
    std::uint64_t seed = 0;
    /// Worker count; 0 means hardware concurrency. Never affects results.
    unsigned threads = 0;
    double r_m = 500.0;
    SimulationOptions simulation;
};

struct BootstrapResult {
    /// Sorted by loglik descending, ties by draw_id ascending.
    std::vector<TrajectoryDraw> retained;
    std::size_t n_total = 0;
    std::size_t n_retained = 0;
    std::uint64_t seed = 0;
    /// Highest loglik among the discarded draws, if any were discarded.
    std::optional<double> max_discarded_loglik;
    /// Interior steps, over all iterations, beyond the Taylor validity cap.
    std::size_t taylor_cap_exceeded = 0;
};

/// ceil(keep_frac * n_total), robust to representation error in keep_frac.
std::size_t retained_count(std::size_t n_total, double keep_frac);

/// Runs n_iter independent parameter-draw / simulate / score iterations and
/// keeps the most likely fraction. Iteration i uses make_stream(seed, i).
BootstrapResult run_bootstrap(std::span<const SegmentSpec> specs, const PriorConfig& priors,
                              const BootstrapSettings& settings);

}  // namespace trackimpute
