#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "trackimpute/error.hpp"
#include "trackimpute/geo.hpp"
#include "trackimpute/movement.hpp"

using namespace trackimpute;

namespace {

SegmentSpec spec_of(int T, PlanarPoint a = {0, 0}, PlanarPoint b = {12000, 5000}, int k = 1) {
    SegmentSpec s;
    s.fish_id = "f";
    s.k = k;
    s.T = T;
    s.start_receiver = {"A", a, 500.0};
    s.end_receiver = {"B", b, 500.0};
    return s;
}

ModelParams params_of(double alpha = 1.0, double gamma = 0.2, double phi = 1.2, double sigma_r_sq = 1e4) {
    ModelParams p;
    p.alpha = alpha;
    p.gamma = gamma;
    p.phi = phi;
    p.sigma_r_sq = sigma_r_sq;
    return p;
}

// All noise switched off: variance floor far below a meter and negligible angular noise.
SimulationOptions quiet_options() {
    SimulationOptions o;
    o.floors.variance_m2 = 1e-30;
    return o;
}

ModelParams quiet_params() { return params_of(1.0, 1e-30, -10.0, 0.0); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

TEST_CASE("sample_endpoint") {
    const Receiver r{"R", {1000.0, -2000.0}, 500.0};
    Rng rng(1);
    SUBCASE("degenerate variance") { CHECK(sample_endpoint(r, 0.0, rng) == r.position); }
    SUBCASE("empirical moments match the isotropic Gaussian") {
        const int n = 100000;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        std::vector<PlanarPoint> pts;
        pts.reserve(n);
        for (int i = 0; i < n; ++i) {
            pts.push_back(sample_endpoint(r, 1e4, rng));
            sx += pts.back().x;
            sy += pts.back().y;
        }
        const double mx = sx / n, my = sy / n;
        for (const auto& p : pts) {
            sxx += (p.x - mx) * (p.x - mx);
            syy += (p.y - my) * (p.y - my);
            sxy += (p.x - mx) * (p.y - my);
        }
        sxx /= n - 1;
        syy /= n - 1;
        sxy /= n - 1;
        CHECK(std::abs(sxx - 1e4) <= 0.02 * 1e4);
        CHECK(std::abs(syy - 1e4) <= 0.02 * 1e4);
        CHECK(std::abs(sxy) <= 0.02 * 1e4);
        const double se = 100.0 / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(mx - r.position.x) <= 3 * se);
        CHECK(std::abs(my - r.position.y) <= 3 * se);
    }
    SUBCASE("enforced radius") {
        const double sd = r.radius_m / 3.0;
        for (int i = 0; i < 20000; ++i) {
            CHECK(distance(sample_endpoint(r, sd * sd, rng, true), r.position) <= r.radius_m);
        }
    }
    SUBCASE("pathological variance under enforcement") {
        CHECK_THROWS_AS(sample_endpoint(r, 1e12, rng, true), SimulationError);
        CHECK_NOTHROW(sample_endpoint(r, 1e12, rng, false));
    }
    SUBCASE("negative variance") { CHECK_THROWS_AS(sample_endpoint(r, -1.0, rng), ValidationError); }
}

TEST_CASE("remaining_distance") {
    const PlanarPoint a{0, 0}, b{6000, 8000};
    CHECK(remaining_distance(a, b, 500, RemainingDistanceMode::Literal) == 10000.0);
    CHECK(remaining_distance(a, b, 500, RemainingDistanceMode::Adjusted) == 9000.0);
    CHECK(remaining_distance(a, a, 500, RemainingDistanceMode::Adjusted, 1.0) == 1.0);
    CHECK(remaining_distance(a, a, 500, RemainingDistanceMode::Literal) == 0.0);
}

TEST_CASE("sigma_psi_sq regimes") {
    Rng rng(2);
    CHECK(sigma_psi_sq(2, 3, params_of(1.0, 1.0), rng) == doctest::Approx(7.389056).epsilon(1e-6));
    CHECK(sigma_psi_sq(4, 3, params_of(1.0, 2.0), rng) == 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = sigma_psi_sq(2 + i % 4, 5, params_of(1.0, 2.0), rng);
        CHECK(v > 0.0);
        CHECK(v < 2.0);
    }
    SUBCASE("decays along the gap when n <= beta") {
        for (int n = 0; n <= 3; ++n) {
            double prev = INFINITY;
            for (int t = 2; t <= n + 1; ++t) {
                const double v = sigma_psi_sq(t, n, params_of(0.7, 0.3), rng);
                CHECK(v <= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("step_length_law clamps the variance") {
    Floors f;
    CHECK(step_length_law(8000, 2, 5, 1.0, f).mean == 2000.0);
    CHECK(step_length_law(8000, 2, 5, 1.0, f).variance == doctest::Approx(8000.0));
    CHECK(step_length_law(8000, 2, 5, -50.0, f).variance == doctest::Approx(1e-6));
    CHECK(step_length_law(8000, 2, 5, 400.0, f).variance == doctest::Approx(1e12));
    CHECK(step_length_law(0.0, 2, 5, 2.0, f).variance == doctest::Approx(1.0));
    CHECK(std::isfinite(step_length_law(1e300, 2, 5, 1e10, f).variance));
}

TEST_CASE("sample_step without noise walks straight at the mean pace") {
    const PlanarPoint from{0, 0}, to{8000, 0};
    Rng rng(3);
    auto [p2, lat2] = sample_step(from, to, 2, 5, quiet_params(), quiet_options(), rng);
    CHECK(p2.x == doctest::Approx(2000.0).epsilon(1e-9));
    CHECK(std::abs(p2.y) < 1e-9);
    CHECK(lat2.t == 2);
    CHECK(lat2.d_remaining == 8000.0);
    CHECK(lat2.theta == 0.0);

    auto [p4, lat4] = sample_step(from, to, 4, 5, quiet_params(), quiet_options(), rng);
    CHECK(p4.x == doctest::Approx(4000.0).epsilon(1e-9));
    CHECK(lat4.sigma_psi_sq >= 0.0);
}

TEST_CASE("sample_step length follows the folded normal mean") {
    // D ~ Normal(2000, 8000^1.7) so |D| is a folded normal.
    const PlanarPoint from{0, 0}, to{0, 8000};
    const auto p = params_of(1.0, 0.3, 1.7, 1.0);
    const double mu = 2000.0;
    const double sd = std::sqrt(std::pow(8000.0, 1.7));
    const double folded_mean =
        sd * std::sqrt(2.0 / std::numbers::pi) * std::exp(-mu * mu / (2 * sd * sd)) + mu * (1 - 2 * normal_cdf(-mu / sd));
    Rng rng(4);
    const int n = 100000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        auto [q, lat] = sample_step(from, to, 2, 5, p, SimulationOptions{}, rng);
        const double len = distance(from, q);
        CHECK(len == doctest::Approx(std::abs(lat.dist_draw)));
        s += len;
        ss += len * len;
    }
    const double mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(mean - folded_mean) <= 3 * se);
}

TEST_CASE("coincident start and target") {
    Rng rng(5);
    auto [q, lat] = sample_step({10, 10}, {10, 10}, 2, 4, params_of(), SimulationOptions{}, rng);
    CHECK(lat.coincident);
    CHECK(lat.theta == 0.0);
    CHECK(std::isfinite(q.x));
}

TEST_CASE("impute_segment shapes and replay") {
    Rng rng(6);
    SUBCASE("T=2 has no interior days") {
        const auto d = impute_segment(spec_of(2), params_of(), SimulationOptions{}, rng);
        CHECK(d.positions.size() == 2);
        CHECK(d.latents.empty());
        CHECK(is_consistent(d));
    }
    SUBCASE("T=5 has three interior days") {
        const auto d = impute_segment(spec_of(5), params_of(), SimulationOptions{}, rng);
        REQUIRE(d.positions.size() == 5);
        REQUIRE(d.latents.size() == 3);
        CHECK(d.latents[0].t == 2);
        CHECK(d.latents[2].t == 4);
        CHECK(max_replay_error(d) < 1e-9);
        CHECK(is_consistent(d));
    }
    SUBCASE("every draw replays") {
        for (int i = 0; i < 500; ++i) {
            const auto d = impute_segment(spec_of(2 + i % 12), params_of(1.0, 0.5 + i % 3, 0.5 + 0.1 * (i % 9)),
                                          SimulationOptions{}, rng);
            CHECK(is_consistent(d));
        }
    }
    SUBCASE("tampered latents are detected") {
        auto d = impute_segment(spec_of(5), params_of(), SimulationOptions{}, rng);
        d.latents[1].psi += 0.01;
        CHECK_FALSE(is_consistent(d));
    }
}

TEST_CASE("zero-noise paths are collinear with the analytic residual") {
    Rng rng(7);
    for (int T = 3; T <= 12; ++T) {
        const PlanarPoint a{-3000, 1000}, b{9000, 6000};
        const auto d = impute_segment(spec_of(T, a, b), quiet_params(), quiet_options(), rng);
        const double L = distance(a, b);
        const double heading = angle_to(a, b);
        for (std::size_t i = 1; i + 1 < d.positions.size(); ++i) {
            CHECK(std::abs(std::remainder(angle_to(d.positions[i - 1], d.positions[i]) - heading,
                                          2 * std::numbers::pi)) < 1e-9);
        }
        CHECK(distance(d.positions[static_cast<std::size_t>(T - 2)], b) ==
              doctest::Approx(L / (T - 1)).epsilon(1e-9));
    }
}

TEST_CASE("adjusted mode shortens the walk") {
    Rng rng(8);
    const PlanarPoint a{0, 0}, b{10000, 0};
    auto opts = quiet_options();
    opts.mode = RemainingDistanceMode::Adjusted;
    auto p = quiet_params();
    const auto d = impute_segment(spec_of(3, a, b), p, opts, rng);
    CHECK(d.latents[0].d_remaining == doctest::Approx(9000.0));
    CHECK(d.positions[1].x == doctest::Approx(4500.0).epsilon(1e-9));
}

TEST_CASE("strict mode keeps interior days out of detection ranges") {
    std::vector<Receiver> grid;
    for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) {
            grid.push_back({"g", {1500.0 * i, 1500.0 * j}, 500.0});
        }
    }
    SimulationOptions opts;
    opts.reject_interior_in_range = true;
    opts.network = grid;
    Rng rng(9);
    const auto spec = spec_of(8, {-6000, -6000}, {6000, 6000});
    for (int i = 0; i < 200; ++i) {
        const auto d = impute_segment(spec, params_of(1.0, 0.5, 1.0, 100.0), opts, rng);
        CHECK(is_consistent(d));
        for (std::size_t t = 1; t + 1 < d.positions.size(); ++t) {
            bool inside = false;
            for (const auto& r : grid) {
                inside = inside || distance(d.positions[t], r.position) <= r.radius_m;
            }
            CHECK(inside == d.latents[t - 1].range_violation);
            CHECK_FALSE(inside);
        }
    }
}

TEST_CASE("impute_trajectory chains segment endpoints") {
    const PlanarPoint r44{0, 0}, r31{8000, 3000}, r18{15000, 9000}, r13{18000, 11000};
    const std::vector<SegmentSpec> specs{spec_of(5, r44, r31, 1), spec_of(6, r31, r18, 2), spec_of(3, r18, r13, 3)};
    Rng rng(10);
    const auto traj = impute_trajectory(specs, params_of(), SimulationOptions{}, rng);
    REQUIRE(traj.segments.size() == 3);
    std::size_t interior = 0, days = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        interior += traj.segments[k].latents.size();
        days += traj.segments[k].positions.size() - (k == 0 ? 0 : 1);
        if (k > 0) {
            const auto& a = traj.segments[k].positions.front();
            const auto& b = traj.segments[k - 1].positions.back();
            CHECK(std::memcmp(&a, &b, sizeof a) == 0);
        }
    }
    CHECK(interior == 8);  // days 2-4, 6-9 and 11
    CHECK(days == 12);

    SUBCASE("single segment equals impute_segment") {
        Rng a(77), b(77);
        const auto t1 = impute_trajectory(std::span(specs).first(1), params_of(), SimulationOptions{}, a);
        const auto s1 = impute_segment(specs[0], params_of(), SimulationOptions{}, b);
        CHECK(t1.segments[0].positions == s1.positions);
        CHECK(t1.segments[0].latents == s1.latents);
    }
    SUBCASE("empty") { CHECK_THROWS_AS(impute_trajectory({}, params_of(), SimulationOptions{}, rng), ValidationError); }
}
