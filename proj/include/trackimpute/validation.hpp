#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trackimpute/bootstrap.hpp"
#include "trackimpute/likelihood.hpp"

namespace trackimpute::validation {

/// The implementation entry points the oracles exercise. Tests swap in
/// deliberately broken versions to confirm the oracles can fail.
struct Subjects {
    std::function<TaylorMoments(double, double)> taylor = [](double th, double v) { return taylor_moments(th, v); };
    std::function<double(double)> covariance_det = [](double v) { return taylor_covariance_det(v); };
    std::function<double(const PlanarPoint&, const PlanarPoint&, const Receiver&, const Receiver&, double)> logp0 =
        [](const PlanarPoint& a, const PlanarPoint& b, const Receiver& ra, const Receiver& rb, double s) {
            return trackimpute::logp0(a, b, ra, rb, s);
        };
    std::function<double(const PlanarPoint&, const PlanarPoint&, double, double, double)> logp1 =
        [](const PlanarPoint& x, const PlanarPoint& prev, double D, double th, double v) {
            return trackimpute::logp1(x, prev, D, th, v);
        };
    std::function<double(const SegmentDraw&, const ModelParams&)> segment_loglik =
        [](const SegmentDraw& d, const ModelParams& p) { return trackimpute::segment_loglik(d, p).value; };
    std::function<ModelParams(const PriorConfig&, double, Rng&)> sample_params =
        [](const PriorConfig& c, double r, Rng& rng) { return trackimpute::sample_params(c, r, rng); };
};

struct OracleResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Options {
    bool quick = false;
    std::uint64_t seed = 20240601;
};

/// Empirical moments of (cos th*, sin th*), th* ~ Normal(theta, v), against the
/// Taylor moments; tolerance max(3 standard errors, v^2) per component.
OracleResult taylor_moment_oracle(const Subjects& s, double theta, double v, std::size_t samples,
                                  std::uint64_t seed);

/// det(sigma_z) from the matrix entries against the closed form over random
/// (theta, v) with v in [0.01, 1]; relative error at most 1e-12.
OracleResult determinant_oracle(const Subjects& s, std::size_t pairs, std::uint64_t seed);

/// segment_loglik of random T=4 draws against an explicit composition of the
/// two step densities, two step-length densities and the endpoint density.
OracleResult factorization_oracle(const Subjects& s, std::size_t draws, std::uint64_t seed);

/// Midpoint quadrature of exp(logp1) over a +-6 sd box; must be 1 within 1e-3.
OracleResult step_density_normalization_oracle(const Subjects& s, double theta, double v, double D,
                                               std::size_t grid);

/// Quadrature of exp(logp0) over x1 with xT at its receiver, rescaled by
/// 2 pi sigma_r^2; must be 1 within 1e-3.
OracleResult endpoint_density_normalization_oracle(const Subjects& s, double sigma_r_sq, std::size_t grid);

/// Gamma and inverse-gamma prior means within 3 standard errors, beta constant.
OracleResult prior_moment_oracle(const Subjects& s, const PriorConfig& priors, std::size_t samples,
                                 std::uint64_t seed);

/// Runs the full battery.
std::vector<OracleResult> run_all(const Subjects& s, const Options& options);

}  // namespace trackimpute::validation
