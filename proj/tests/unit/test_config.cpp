#include <filesystem>

#include "doctest.h"
#include "trackimpute/config.hpp"
#include "trackimpute/error.hpp"

using namespace trackimpute;

TEST_CASE("empty config gives the defaults") {
    const auto c = parse_config("{}");
    CHECK(c.priors == PriorConfig{});
    CHECK(c.n_iter == 5000);
    CHECK(c.keep_frac == 0.9);
    CHECK_FALSE(c.seed.has_value());
    CHECK(c.remaining_distance_mode == RemainingDistanceMode::Literal);
    CHECK(c.priors.beta_fixed == 3);
}

TEST_CASE("config round trip") {
    auto c = parse_config(R"({"priors": {"sigma_r_scale": 55000, "beta_fixed": 2}, "seed": 17,
                              "remaining_distance_mode": "adjusted", "floors": {"distance_m": 2.5},
                              "heatmap": {"cell_m": 100, "include_endpoints": false}, "threads": 3})");
    CHECK(c.priors.sigma_r_scale == 55000);
    CHECK(c.priors.beta_fixed == 2);
    CHECK(c.seed == 17u);
    CHECK(c.remaining_distance_mode == RemainingDistanceMode::Adjusted);
    CHECK(c.floors.distance_m == 2.5);
    CHECK_FALSE(c.heatmap.include_endpoints);
    const auto again = parse_config(dump_config(c));
    CHECK(again.priors == c.priors);
    CHECK(again.seed == c.seed);
    CHECK(again.floors.distance_m == c.floors.distance_m);
    CHECK(again.heatmap.cell_m == 100);
    CHECK(again.threads == 3);
}

TEST_CASE("config rejects bad input") {
    CHECK_THROWS_AS(parse_config("not json"), ValidationError);
    CHECK_THROWS_AS(parse_config("[]"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"typo": 1})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"priors": {"alpha": 1}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"keep_frac": 0})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"keep_frac": "high"})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"seed": -4})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"remaining_distance_mode": "zero"})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"floors": {"variance_m2": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"heatmap": {"cell_m": -1}})"), ValidationError);
}

TEST_CASE("shipped configs load") {
    const std::filesystem::path root = TRACKIMPUTE_SOURCE_DIR;
    const auto defaults = load_config(root / "configs" / "default.json");
    CHECK(defaults.priors == PriorConfig{});
    CHECK(defaults.n_iter == 5000);
    const auto meters = load_config(root / "configs" / "meters_calibrated.json");
    CHECK(meters.priors.sigma_r_scale > 1000.0);
}
