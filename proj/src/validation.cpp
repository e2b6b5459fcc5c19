#include "trackimpute/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "trackimpute/movement.hpp"

namespace trackimpute::validation {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Bivariate normal log-density with the inverse and determinant taken numerically.
double bivariate_normal_logpdf(double rx, double ry, double sxx, double sxy, double syy) {
    const double det = sxx * syy - sxy * sxy;
    const double quad = (syy * rx * rx - 2.0 * sxy * rx * ry + sxx * ry * ry) / det;
    return -std::log(kTwoPi) - 0.5 * std::log(det) - 0.5 * quad;
}

double normal_logpdf(double x, double mean, double var) {
    return -0.5 * std::log(kTwoPi * var) - 0.5 * (x - mean) * (x - mean) / var;
}

/// Step density written out from the Taylor moments, independently of logp1.
double reference_step_logpdf(const PlanarPoint& x, const PlanarPoint& prev, double D, double theta, double v) {
    const double len = std::max(std::abs(D), 1e-3);
    v = std::max(v, 1e-12);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double mx = prev.x + len * (c - 0.5 * c * v);
    const double my = prev.y + len * (s - 0.5 * s * v);
    const double d2 = len * len;
    const double sxx = d2 * v * (s * s + 0.5 * c * c * v);
    const double syy = d2 * v * (c * c + 0.5 * s * s * v);
    const double sxy = d2 * v * (-s * c + 0.5 * s * c * v);
    return bivariate_normal_logpdf(x.x - mx, x.y - my, sxx, sxy, syy);
}

double reference_endpoint_logpdf(const PlanarPoint& x, const PlanarPoint& r, double var) {
    return normal_logpdf(x.x, r.x, var) + normal_logpdf(x.y, r.y, var);
}

}  // namespace

OracleResult taylor_moment_oracle(const Subjects& s, double theta, double v, std::size_t samples,
                                  std::uint64_t seed) {
    OracleResult res;
    res.name = "taylor_moments(theta=" + fmt(theta) + ", var=" + fmt(v) + ")";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(theta, std::sqrt(v));
    std::vector<double> xs(samples);
    std::vector<double> ys(samples);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double a = normal(rng);
        xs[i] = std::cos(a);
        ys[i] = std::sin(a);
        mx += xs[i];
        my += ys[i];
    }
    const auto n = static_cast<double>(samples);
    mx /= n;
    my /= n;
    double vxx = 0.0, vyy = 0.0, vxy = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        vxx += dx * dx;
        vyy += dy * dy;
        vxy += dx * dy;
    }
    vxx /= n - 1.0;
    vyy /= n - 1.0;
    vxy /= n - 1.0;
    // Spread of the per-sample second-moment terms gives the standard errors of the covariance estimates.
    double qxx = 0.0, qyy = 0.0, qxy = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        qxx += (dx * dx - vxx) * (dx * dx - vxx);
        qyy += (dy * dy - vyy) * (dy * dy - vyy);
        qxy += (dx * dy - vxy) * (dx * dy - vxy);
    }
    const double se_mx = std::sqrt(vxx / n);
    const double se_my = std::sqrt(vyy / n);
    const double se_xx = std::sqrt(qxx / (n - 1.0) / n);
    const double se_yy = std::sqrt(qyy / (n - 1.0) / n);
    const double se_xy = std::sqrt(qxy / (n - 1.0) / n);

    const auto m = s.taylor(theta, v);
    const double floor_tol = v * v;
    struct Cmp {
        const char* what;
        double empirical;
        double predicted;
        double se;
    };
    const Cmp cmps[] = {{"mean_x", mx, m.mu_z[0], se_mx},   {"mean_y", my, m.mu_z[1], se_my},
                        {"var_x", vxx, m.sigma_z[0], se_xx}, {"cov_xy", vxy, m.sigma_z[1], se_xy},
                        {"var_y", vyy, m.sigma_z[3], se_yy}};
    res.passed = std::abs(m.sigma_z[1] - m.sigma_z[2]) == 0.0;
    double worst_ratio = 0.0;
    std::string worst;
    for (const auto& c : cmps) {
        const double tol = std::max(3.0 * c.se, floor_tol);
        const double ratio = std::abs(c.empirical - c.predicted) / tol;
        if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst = c.what;
        }
    }
    res.passed = res.passed && worst_ratio <= 1.0;
    res.detail = "worst component " + worst + " at " + fmt(worst_ratio) + " of tolerance";
    return res;
}

OracleResult determinant_oracle(const Subjects& s, std::size_t pairs, std::uint64_t seed) {
    OracleResult res;
    res.name = "determinant identity";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> var(0.01, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double th = angle(rng);
        const double v = var(rng);
        const auto m = s.taylor(th, v);
        // Kahan's 2x2 determinant: fma recovers the rounding of the product being subtracted.
        const double w = m.sigma_z[1] * m.sigma_z[2];
        const double e = std::fma(-m.sigma_z[1], m.sigma_z[2], w);
        const double numeric = std::fma(m.sigma_z[0], m.sigma_z[3], -w) + e;
        const double closed = s.covariance_det(v);
        worst = std::max(worst, std::abs(numeric - closed) / std::abs(numeric));
    }
    res.passed = worst <= 1e-12;
    res.detail = "max relative error " + fmt(worst) + " over " + std::to_string(pairs) + " pairs";
    return res;
}

OracleResult factorization_oracle(const Subjects& s, std::size_t draws, std::uint64_t seed) {
    OracleResult res;
    res.name = "T=4 factorization";
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        ModelParams p;
        p.alpha = 0.5 + u01(gen);
        p.gamma = 0.01 + 0.49 * u01(gen);
        p.phi = 0.5 + u01(gen);
        p.sigma_r_sq = 100.0 + 9900.0 * u01(gen);
        p.beta = 3;
        p.r_m = 500.0;
        SegmentSpec spec;
        spec.fish_id = "oracle";
        spec.T = 4;
        spec.start_receiver = {"a", {-20000.0 * u01(gen), 20000.0 * u01(gen)}, 500.0};
        spec.end_receiver = {"b", {20000.0 * u01(gen), -20000.0 * u01(gen)}, 500.0};
        Rng rng = make_stream(seed, i);
        const SegmentDraw draw = impute_segment(spec, p, SimulationOptions{}, rng);

        const auto& X = draw.positions;
        double ref = reference_endpoint_logpdf(X[0], spec.start_receiver.position, p.sigma_r_sq) +
                     reference_endpoint_logpdf(X[3], spec.end_receiver.position, p.sigma_r_sq);
        for (std::size_t j = 0; j < 2; ++j) {
            const auto& lat = draw.latents[j];
            const double mean = lat.d_remaining / static_cast<double>(spec.T - (lat.t - 1));
            const double var = std::clamp(std::pow(std::max(lat.d_remaining, 1.0), p.phi), 1e-6, 1e12);
            ref += reference_step_logpdf(X[j + 1], X[j], lat.dist_draw, lat.theta, lat.sigma_psi_sq);
            ref += normal_logpdf(lat.dist_draw, mean, var);
        }
        const double got = s.segment_loglik(draw, p);
        worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
    }
    res.passed = worst <= 1e-10;
    res.detail = "max scaled difference " + fmt(worst) + " over " + std::to_string(draws) + " draws";
    return res;
}

OracleResult step_density_normalization_oracle(const Subjects& s, double theta, double v, double D,
                                               std::size_t grid) {
    OracleResult res;
    res.name = "step density mass(theta=" + fmt(theta) + ", var=" + fmt(v) + ", D=" + fmt(D) + ")";
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    const PlanarPoint prev{1000.0, -2000.0};
    const double cx = prev.x + std::abs(D) * (1.0 - 0.5 * v) * c;
    const double cy = prev.y + std::abs(D) * (1.0 - 0.5 * v) * sn;
    const double hx = 6.0 * std::abs(D) * std::sqrt(v * (sn * sn + 0.5 * c * c * v));
    const double hy = 6.0 * std::abs(D) * std::sqrt(v * (c * c + 0.5 * sn * sn * v));
    const double dx = 2.0 * hx / static_cast<double>(grid);
    const double dy = 2.0 * hy / static_cast<double>(grid);
    double mass = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = cx - hx + (static_cast<double>(i) + 0.5) * dx;
        for (std::size_t j = 0; j < grid; ++j) {
            const double y = cy - hy + (static_cast<double>(j) + 0.5) * dy;
            mass += std::exp(s.logp1({x, y}, prev, D, theta, v));
        }
    }
    mass *= dx * dy;
    res.passed = std::abs(mass - 1.0) <= 1e-3;
    res.detail = "integral " + fmt(mass);
    return res;
}

OracleResult endpoint_density_normalization_oracle(const Subjects& s, double sigma_r_sq, std::size_t grid) {
    OracleResult res;
    res.name = "endpoint density mass(var=" + fmt(sigma_r_sq) + ")";
    const Receiver r1{"r1", {250.0, -125.0}, 500.0};
    const Receiver rT{"rT", {9000.0, 4000.0}, 500.0};
    const double h = 6.0 * std::sqrt(sigma_r_sq);
    const double step = 2.0 * h / static_cast<double>(grid);
    double mass = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = r1.position.x - h + (static_cast<double>(i) + 0.5) * step;
        for (std::size_t j = 0; j < grid; ++j) {
            const double y = r1.position.y - h + (static_cast<double>(j) + 0.5) * step;
            mass += std::exp(s.logp0({x, y}, rT.position, r1, rT, sigma_r_sq));
        }
    }
    mass *= step * step * kTwoPi * sigma_r_sq;
    res.passed = std::abs(mass - 1.0) <= 1e-3;
    res.detail = "rescaled integral " + fmt(mass);
    return res;
}

OracleResult prior_moment_oracle(const Subjects& s, const PriorConfig& priors, std::size_t samples,
                                 std::uint64_t seed) {
    OracleResult res;
    res.name = "prior moments";
    double sum_alpha = 0.0;
    double sum_sr = 0.0;
    bool beta_constant = true;
    bool support_ok = true;
    for (std::size_t i = 0; i < samples; ++i) {
        Rng rng = make_stream(seed, i);
        const auto p = s.sample_params(priors, 500.0, rng);
        sum_alpha += p.alpha;
        sum_sr += p.sigma_r_sq;
        beta_constant = beta_constant && p.beta == priors.beta_fixed;
        support_ok = support_ok && p.alpha > 0.0 && p.gamma > 0.0 && p.phi > 0.0 && p.sigma_r_sq > 0.0;
    }
    const auto n = static_cast<double>(samples);
    const double alpha_mean = priors.alpha_shape / priors.alpha_rate;
    const double alpha_se = std::sqrt(priors.alpha_shape) / priors.alpha_rate / std::sqrt(n);
    const double a = priors.sigma_r_shape;
    const double sr_mean = priors.sigma_r_scale / (a - 1.0);
    const double sr_se = sr_mean / std::sqrt(a - 2.0) / std::sqrt(n);
    const double z_alpha = (sum_alpha / n - alpha_mean) / alpha_se;
    const double z_sr = (sum_sr / n - sr_mean) / sr_se;
    res.passed = std::abs(z_alpha) <= 3.0 && std::abs(z_sr) <= 3.0 && beta_constant && support_ok;
    res.detail = "alpha mean " + fmt(sum_alpha / n) + " (z=" + fmt(z_alpha) + "), sigma_r^2 mean " +
                 fmt(sum_sr / n) + " (z=" + fmt(z_sr) + "), beta " + (beta_constant ? "constant" : "varies");
    return res;
}

std::vector<OracleResult> run_all(const Subjects& s, const Options& options) {
    std::vector<OracleResult> out;
    // Monte Carlo sizes stay at the full count in quick mode; only the quadrature grids shrink.
    const std::size_t mc = 1000000;
    std::uint64_t stream = 0;
    for (double th : {0.0, 0.7, 2.4}) {
        for (double v : {0.01, 0.05, 0.25}) {
            out.push_back(taylor_moment_oracle(s, th, v, mc, mix64(options.seed + ++stream)));
        }
    }
    out.push_back(determinant_oracle(s, 1000, mix64(options.seed + ++stream)));
    out.push_back(factorization_oracle(s, 100, mix64(options.seed + ++stream)));
    const std::size_t grid = options.quick ? 800 : 2000;
    out.push_back(step_density_normalization_oracle(s, 0.3, 0.05, 1500.0, grid));
    out.push_back(step_density_normalization_oracle(s, 2.0, 0.2, 800.0, grid));
    out.push_back(step_density_normalization_oracle(s, -1.2, 0.01, 3000.0, grid));
    for (double var : {0.00149, 1e4, 2.5e5}) {
        out.push_back(endpoint_density_normalization_oracle(s, var, options.quick ? 200 : 600));
    }
    out.push_back(prior_moment_oracle(s, PriorConfig{}, 100000, mix64(options.seed + ++stream)));
    return out;
}

}  // namespace trackimpute::validation
