#include "trackimpute/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "trackimpute/error.hpp"
#include "trackimpute/likelihood.hpp"

namespace trackimpute {

void validate(const PriorConfig& c) {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(c.alpha_shape) || !positive(c.alpha_rate)) {
        throw ValidationError("alpha prior shape and rate must be positive");
    }
    if (!positive(c.phi_logvar) || !std::isfinite(c.phi_logmean)) {
        throw ValidationError("phi prior needs a finite log-mean and positive log-variance");
    }
    if (!positive(c.gamma_logvar) || !std::isfinite(c.gamma_logmean)) {
        throw ValidationError("gamma prior needs a finite log-mean and positive log-variance");
    }
    if (!positive(c.sigma_r_shape) || !positive(c.sigma_r_scale)) {
        throw ValidationError("sigma_r^2 prior shape and scale must be positive");
    }
    if (c.beta_fixed < 0) {
        throw ValidationError("beta must be nonnegative");
    }
}

ModelParams sample_params(const PriorConfig& c, double r_m, Rng& rng) {
    ModelParams p;
    p.alpha = std::gamma_distribution<double>(c.alpha_shape, 1.0 / c.alpha_rate)(rng);
    p.phi = std::lognormal_distribution<double>(c.phi_logmean, std::sqrt(c.phi_logvar))(rng);
    p.gamma = std::lognormal_distribution<double>(c.gamma_logmean, std::sqrt(c.gamma_logvar))(rng);
    p.sigma_r_sq = c.sigma_r_scale / std::gamma_distribution<double>(c.sigma_r_shape, 1.0)(rng);
    p.beta = c.beta_fixed;
    p.r_m = r_m;
    return p;
}

std::size_t retained_count(std::size_t n_total, double keep_frac) {
    const double raw = keep_frac * static_cast<double>(n_total);
    const auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::min(n_total, std::max<std::size_t>(n, 1));
}

BootstrapResult run_bootstrap(std::span<const SegmentSpec> specs, const PriorConfig& priors,
                              const BootstrapSettings& settings) {
    if (specs.empty()) {
        throw ValidationError("bootstrap needs at least one segment");
    }
    if (settings.n_iter < 1) {
        throw ValidationError("n_iter must be at least 1");
    }
    if (!(settings.keep_frac > 0.0 && settings.keep_frac <= 1.0)) {
        throw ValidationError("keep_frac must lie in (0, 1]");
    }
    validate(priors);

    const std::size_t n = settings.n_iter;
    std::vector<TrajectoryDraw> draws(n);
    std::vector<std::size_t> cap_hits(n, 0);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) {
                return;
            }
            try {
                Rng rng = make_stream(settings.seed, i);
                const ModelParams params = sample_params(priors, settings.r_m, rng);
                TrajectoryDraw draw = impute_trajectory(specs, params, settings.simulation, rng);
                draw.draw_id = i;
                cap_hits[i] = static_cast<std::size_t>(score(draw, settings.simulation.floors).taylor_cap_exceeded);
                draws[i] = std::move(draw);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n, std::memory_order_relaxed);
                return;
            }
        }
    };

    unsigned width = settings.threads != 0 ? settings.threads : std::max(1u, std::thread::hardware_concurrency());
    width = static_cast<unsigned>(std::min<std::size_t>(width, n));
    if (width <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(width);
        for (unsigned w = 0; w < width; ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    const auto key = [](const TrajectoryDraw& d) {
        return std::isnan(d.loglik) ? -std::numeric_limits<double>::infinity() : d.loglik;
    };
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ka = key(draws[a]);
        const double kb = key(draws[b]);
        return ka != kb ? ka > kb : a < b;
    });

    BootstrapResult result;
    result.n_total = n;
    result.n_retained = retained_count(n, settings.keep_frac);
    result.seed = settings.seed;
    result.taylor_cap_exceeded = std::accumulate(cap_hits.begin(), cap_hits.end(), std::size_t{0});
    result.retained.reserve(result.n_retained);
    for (std::size_t j = 0; j < result.n_retained; ++j) {
        result.retained.push_back(std::move(draws[order[j]]));
    }
    if (result.n_retained < n) {
        result.max_discarded_loglik = draws[order[result.n_retained]].loglik;
    }
    return result;
}

}  // namespace trackimpute
