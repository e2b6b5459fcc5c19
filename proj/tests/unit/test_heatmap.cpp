#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "trackimpute/bootstrap.hpp"
#include "trackimpute/error.hpp"
#include "trackimpute/heatmap.hpp"

using namespace trackimpute;

namespace {

TrajectoryDraw single_point(PlanarPoint p) {
    TrajectoryDraw d;
    SegmentDraw s;
    s.spec.T = 1;
    s.positions = {p};
    d.segments.push_back(s);
    return d;
}

std::vector<TrajectoryDraw> ensemble(std::size_t n, std::uint64_t seed) {
    const Receiver a{"44", {0, 0}, 500}, b{"31", {8000, 3000}, 500}, c{"18", {15000, 9000}, 500},
        e{"13", {18000, 11000}, 500};
    const std::vector<SegmentSpec> specs{{"f", 1, a, b, 5}, {"f", 2, b, c, 6}, {"f", 3, c, e, 3}};
    PriorConfig priors;
    priors.phi_logmean = 0.0;  // phi near 1 keeps the extent modest
    priors.phi_logvar = 0.01;
    priors.sigma_r_scale = 5e4;
    BootstrapSettings s;
    s.n_iter = n;
    s.keep_frac = 1.0;
    s.seed = seed;
    s.threads = 1;
    return run_bootstrap(specs, priors, s).retained;
}

}  // namespace

TEST_CASE("one point lands in exactly one cell") {
    const std::vector<TrajectoryDraw> draws{single_point({123.4, -56.7})};
    HeatmapOptions o;
    o.cell_m = 10;
    o.padding_m = 25;
    const auto g = build_heatmap(draws, o);
    CHECK(g.total() == 1);
    CHECK(std::count(g.counts.begin(), g.counts.end(), 1u) == 1);
    CHECK(g.ncols == 6);
    CHECK(g.nrows == 6);
}

TEST_CASE("boundary points go to the higher cell") {
    std::vector<TrajectoryDraw> draws{single_point({0, 0}), single_point({10, 0}), single_point({20, 20})};
    HeatmapOptions o;
    o.cell_m = 10;
    o.padding_m = 0;
    const auto g = build_heatmap(draws, o);
    CHECK(g.ncols == 3);
    CHECK(g.nrows == 3);
    CHECK(g.at(0, 0) == 1);
    CHECK(g.at(0, 1) == 1);
    CHECK(g.at(2, 2) == 1);
    CHECK(g.origin == PlanarPoint{0, 0});
}

TEST_CASE("conservation, linearity and endpoint exclusion") {
    const auto draws = ensemble(40, 11);
    std::uint64_t expected = 0;
    for (const auto& d : draws) {
        for (const auto& s : d.segments) {
            expected += static_cast<std::uint64_t>(s.spec.T);
        }
    }
    CHECK(expected == 40 * 14);
    for (double cell : {50.0, 100.0, 500.0, 2500.0}) {
        HeatmapOptions o;
        o.cell_m = cell;
        CHECK(build_heatmap(draws, o).total() == expected);
    }
    HeatmapOptions o;
    o.cell_m = 400;
    const auto single = build_heatmap(std::span(draws).first(1), o);
    std::vector<TrajectoryDraw> twice{draws[0], draws[0]};
    const auto doubled = build_heatmap(twice, o);
    REQUIRE(doubled.counts.size() == single.counts.size());
    for (std::size_t i = 0; i < single.counts.size(); ++i) {
        CHECK(doubled.counts[i] == 2 * single.counts[i]);
    }
    o.include_endpoints = false;
    CHECK(build_heatmap(draws, o).total() == 40 * 8);
}

TEST_CASE("heatmap errors") {
    HeatmapOptions o;
    CHECK_THROWS_AS(build_heatmap({}, o), ValidationError);
    const std::vector<TrajectoryDraw> far{single_point({0, 0}), single_point({1e9, 1e9})};
    o.cell_m = 1.0;
    CHECK_THROWS_AS(build_heatmap(far, o), ValidationError);
    CHECK(heatmap_cell_count(far, o) > o.max_cells);
    o.cell_m = 0;
    CHECK_THROWS_AS(build_heatmap(std::span(far).first(1), o), ValidationError);
}

TEST_CASE("heatmap CSV and PGM") {
    HeatmapGrid g;
    g.ncols = 2;
    g.nrows = 2;
    g.counts = {1, 0, 0, 70000};
    std::ostringstream csv;
    write_heatmap(csv, g, HeatmapFormat::Csv);
    CHECK(csv.str() == "row,col,count\n0,0,1\n0,1,0\n1,0,0\n1,1,70000\n");

    std::ostringstream pgm;
    write_heatmap(pgm, g, HeatmapFormat::Pgm);
    const std::string header = "P5\n2 2\n65535\n";
    const auto bytes = pgm.str();
    REQUIRE(bytes.size() == header.size() + 8);
    CHECK(bytes.substr(0, header.size()) == header);
    // north row (row 1) first, big-endian, clamped
    const auto* px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
    CHECK(px[0] == 0);
    CHECK(px[1] == 0);
    CHECK(px[2] == 0xff);
    CHECK(px[3] == 0xff);
    CHECK(px[4] == 0);
    CHECK(px[5] == 1);

    HeatmapGrid zeros;
    zeros.ncols = 3;
    zeros.nrows = 1;
    zeros.counts = {0, 0, 0};
    std::ostringstream z;
    write_heatmap(z, zeros, HeatmapFormat::Pgm);
    CHECK(z.str() == std::string("P5\n3 1\n65535\n") + std::string(6, '\0'));
}

TEST_CASE("trajectory export writes every stored position") {
    const GeoPoint origin{-76.0, 37.0};
    SUBCASE("empty set is header only") {
        std::ostringstream out;
        write_trajectories(out, {}, origin);
        CHECK(out.str() == "draw_id,segment_k,t,x_m,y_m,lon,lat,loglik\n");
    }
    SUBCASE("rows, round trip and determinism") {
        const auto draws = ensemble(5, 12);
        std::ostringstream out;
        write_trajectories(out, draws, origin);
        std::size_t rows = 0;
        for (char ch : out.str()) {
            rows += ch == '\n';
        }
        CHECK(rows == 1 + 5 * 14);

        std::ostringstream again;
        write_trajectories(again, draws, origin);
        CHECK(again.str() == out.str());

        std::istringstream in(out.str());
        const auto back = read_trajectories(in);
        REQUIRE(back.size() == draws.size());
        for (std::size_t i = 0; i < draws.size(); ++i) {
            CHECK(back[i].draw_id == draws[i].draw_id);
            REQUIRE(back[i].segments.size() == 3);
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(back[i].segments[k].spec.k == static_cast<int>(k + 1));
                REQUIRE(back[i].segments[k].positions.size() == draws[i].segments[k].positions.size());
                for (std::size_t t = 0; t < back[i].segments[k].positions.size(); ++t) {
                    const auto& p = back[i].segments[k].positions[t];
                    const auto& q = draws[i].segments[k].positions[t];
                    CHECK(std::hypot(p.x - q.x, p.y - q.y) <= 1e-6);
                }
            }
        }
        HeatmapOptions o;
        o.cell_m = 300;
        CHECK(build_heatmap(back, o) == build_heatmap(draws, o));
    }
    SUBCASE("malformed input") {
        std::istringstream bad("draw_id,segment_k,t,x_m,y_m,lon,lat,loglik\n0,1,1,abc,0,0,0,0\n");
        CHECK_THROWS_AS(read_trajectories(bad), ParseError);
        std::istringstream gap("draw_id,segment_k,t,x_m,y_m,lon,lat,loglik\n0,1,1,0,0,0,0,0\n0,1,3,0,0,0,0,0\n");
        CHECK_THROWS_AS(read_trajectories(gap), ParseError);
        std::istringstream header("nope\n");
        CHECK_THROWS_AS(read_trajectories(header), ParseError);
    }
}
