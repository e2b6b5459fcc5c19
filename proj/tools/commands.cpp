#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "trackimpute/config.hpp"
#include "trackimpute/error.hpp"
#include "trackimpute/heatmap.hpp"
#include "trackimpute/ingestion.hpp"

#ifndef TRACKIMPUTE_VERSION
#define TRACKIMPUTE_VERSION "0.0.0"
#endif

namespace trackimpute::cli {

namespace fs = std::filesystem;

namespace {

/// Input-stage failure, reported with exit code 2.
struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ImputeArgs {
    std::string detections;
    std::string receivers;
    std::string config;
    std::string fish_id;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> iters;
    std::optional<double> keep;
    std::optional<unsigned> threads;
    bool verbose = false;
};

struct HeatmapArgs {
    std::string trajectories;
    double cell_m = 0.0;
    std::string out;
    double padding_m = HeatmapOptions{}.padding_m;
    bool exclude_endpoints = false;
    std::size_t max_cells = HeatmapOptions{}.max_cells;
    std::string format = "both";
};

struct ValidateArgs {
    bool quick = false;
    std::uint64_t seed = validation::Options{}.seed;
};

void write_heatmaps(const HeatmapGrid& grid, const fs::path& dir, const std::string& format) {
    if (format == "csv" || format == "both") {
        export_heatmap(grid, dir / "heatmap.csv", HeatmapFormat::Csv);
    }
    if (format == "pgm" || format == "both") {
        export_heatmap(grid, dir / "heatmap.pgm", HeatmapFormat::Pgm);
    }
}

template <typename Fn>
auto input_stage(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw UsageFailure(e.what());
    } catch (const ValidationError& e) {
        throw UsageFailure(e.what());
    } catch (const IoError& e) {
        throw UsageFailure(e.what());
    }
}

int cmd_impute(const ImputeArgs& a, std::ostream& out, std::ostream& err) {
    const auto started = std::chrono::steady_clock::now();
    auto log = [&](const std::string& msg) {
        if (a.verbose) {
            err << "[impute] " << msg << '\n';
        }
    };

    RunConfig cfg = input_stage([&] { return load_config(a.config); });
    if (a.seed) cfg.seed = a.seed;
    if (a.iters) cfg.n_iter = *a.iters;
    if (a.keep) cfg.keep_frac = *a.keep;
    if (a.threads) cfg.threads = *a.threads;
    input_stage([&] {
        validate(cfg);
        return 0;
    });
    if (!cfg.seed) {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        log("no seed given, using " + std::to_string(*cfg.seed));
    }

    const ReceiverTable receivers = input_stage([&] { return parse_receivers(fs::path(a.receivers), cfg.detection_radius_m); });
    const auto detections = input_stage([&] { return parse_detections(fs::path(a.detections)); });
    log("read " + std::to_string(receivers.size()) + " receivers and " + std::to_string(detections.size()) +
        " detections");

    std::vector<DetectionRecord> mine;
    for (const auto& d : detections) {
        if (d.fish_id == a.fish_id) {
            mine.push_back(d);
        }
    }
    if (mine.empty()) {
        throw UsageFailure("unknown fish id '" + a.fish_id + "'");
    }
    const auto daily = collapse_daily(mine);
    const auto segments = input_stage([&] { return build_segments(daily, receivers); });
    if (segments.empty()) {
        throw UsageFailure("fish '" + a.fish_id + "' has fewer than two detection days; nothing to impute");
    }
    log(std::to_string(segments.size()) + " segments spanning " + std::to_string(daily.back().day_index) + " days");

    BootstrapSettings settings;
    settings.n_iter = cfg.n_iter;
    settings.keep_frac = cfg.keep_frac;
    settings.seed = *cfg.seed;
    settings.threads = cfg.threads;
    settings.r_m = cfg.detection_radius_m;
    settings.simulation.mode = cfg.remaining_distance_mode;
    settings.simulation.floors = cfg.floors;
    settings.simulation.enforce_endpoint_radius = cfg.enforce_endpoint_radius;
    settings.simulation.reject_interior_in_range = cfg.reject_interior_in_range;
    settings.simulation.interior_retry_cap = cfg.interior_retry_cap;
    settings.simulation.network = receivers.receivers();

    const auto result = run_bootstrap(segments, cfg.priors, settings);
    log("retained " + std::to_string(result.n_retained) + " of " + std::to_string(result.n_total) + " draws");
    if (result.taylor_cap_exceeded > 0) {
        err << "warning: " << result.taylor_cap_exceeded
            << " interior steps had angular variance above " << kTaylorValidityCap
            << "; the step density approximation is poor there\n";
    }

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    export_trajectories(result.retained, receivers.origin(), dir / "trajectories.csv");

    HeatmapOptions hm = cfg.heatmap;
    while (heatmap_cell_count(result.retained, hm) > hm.max_cells) {
        hm.cell_m *= 2.0;
    }
    if (hm.cell_m != cfg.heatmap.cell_m) {
        err << "warning: heatmap cell size raised from " << format_value(cfg.heatmap.cell_m) << " m to "
            << format_value(hm.cell_m) << " m to stay within " << hm.max_cells << " cells\n";
    }
    const auto grid = build_heatmap(result.retained, hm);
    write_heatmaps(grid, dir, "both");

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json manifest;
    manifest["engine_version"] = TRACKIMPUTE_VERSION;
    manifest["command"] = "impute";
    manifest["inputs"] = {{"detections", fs::absolute(a.detections).string()},
                          {"receivers", fs::absolute(a.receivers).string()},
                          {"config", fs::absolute(a.config).string()}};
    manifest["fish_id"] = a.fish_id;
    manifest["seed"] = *cfg.seed;
    manifest["n_iter"] = cfg.n_iter;
    manifest["keep_frac"] = cfg.keep_frac;
    manifest["threads"] = cfg.threads;
    manifest["output_directory"] = fs::absolute(dir).string();
    manifest["resolved_config"] = nlohmann::json::parse(dump_config(cfg));
    manifest["projection_origin"] = {{"lon", receivers.origin().lon}, {"lat", receivers.origin().lat}};
    manifest["segments"] = nlohmann::json::array();
    for (const auto& s : segments) {
        manifest["segments"].push_back(
            {{"k", s.k}, {"T", s.T}, {"start_receiver", s.start_receiver.id}, {"end_receiver", s.end_receiver.id}});
    }
    manifest["n_retained"] = result.n_retained;
    manifest["heatmap"] = {{"cell_m", hm.cell_m},
                           {"padding_m", hm.padding_m},
                           {"include_endpoints", hm.include_endpoints},
                           {"origin_x_m", grid.origin.x},
                           {"origin_y_m", grid.origin.y},
                           {"ncols", grid.ncols},
                           {"nrows", grid.nrows}};
    manifest["taylor_cap_exceeded_steps"] = result.taylor_cap_exceeded;
    manifest["wall_clock_seconds"] = seconds;
    std::ofstream mf(dir / "manifest.json", std::ios::trunc);
    mf << manifest.dump(2) << '\n';
    if (!mf) {
        throw IoError("failed writing manifest in '" + dir.string() + "'");
    }
    out << "wrote " << result.n_retained << " trajectories to " << (dir / "trajectories.csv").string() << '\n';
    return kExitOk;
}

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out, std::ostream&) {
    const auto draws = input_stage([&] { return read_trajectories(fs::path(a.trajectories)); });
    if (draws.empty()) {
        throw UsageFailure("'" + a.trajectories + "' contains no trajectories");
    }
    HeatmapOptions hm;
    hm.cell_m = a.cell_m;
    hm.padding_m = a.padding_m;
    hm.include_endpoints = !a.exclude_endpoints;
    hm.max_cells = a.max_cells;
    const auto grid = input_stage([&] { return build_heatmap(draws, hm); });
    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    write_heatmaps(grid, dir, a.format);
    out << "binned " << grid.total() << " positions into " << grid.ncols << " x " << grid.nrows << " cells\n";
    return kExitOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out, const validation::Subjects& subjects) {
    validation::Options opts;
    opts.quick = a.quick;
    opts.seed = a.seed;
    bool all = true;
    for (const auto& r : validation::run_all(subjects, opts)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        all = all && r.passed;
    }
    out << (all ? "all oracles passed" : "oracle failures detected") << '\n';
    return all ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const validation::Subjects& subjects) {
    CLI::App app{"Directed random-walk trajectory imputation for acoustic telemetry", "trackimpute"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TRACKIMPUTE_VERSION);

    ImputeArgs ia;
    auto* impute = app.add_subcommand("impute", "Impute, filter and export trajectories for one fish");
    impute->add_option("--detections", ia.detections, "Detections CSV (fish_id,timestamp,receiver_id)")->required();
    impute->add_option("--receivers", ia.receivers, "Receivers CSV (receiver_id,lon,lat)")->required();
    impute->add_option("--config", ia.config, "Run configuration JSON")->required();
    impute->add_option("--fish-id", ia.fish_id, "Fish to impute")->required();
    impute->add_option("--out", ia.out, "Output directory")->required();
    impute->add_option("--seed", ia.seed, "Master seed (overrides config)");
    impute->add_option("--iters", ia.iters, "Bootstrap iterations (overrides config)")->check(CLI::PositiveNumber);
    impute->add_option("--keep", ia.keep, "Fraction of draws to keep (overrides config)")
        ->check(CLI::Range(0.0, 1.0));
    impute->add_option("--threads", ia.threads, "Worker threads, 0 = all cores (overrides config)");
    impute->add_flag("--verbose", ia.verbose, "Log progress to standard error");

    HeatmapArgs ha;
    auto* heatmap = app.add_subcommand("heatmap", "Rebuild a heatmap from an exported trajectory file");
    heatmap->add_option("--trajectories", ha.trajectories, "Trajectory CSV written by impute")->required();
    heatmap->add_option("--cell-m", ha.cell_m, "Cell side in meters")->required()->check(CLI::PositiveNumber);
    heatmap->add_option("--out", ha.out, "Output directory")->required();
    heatmap->add_option("--padding-m", ha.padding_m, "Padding around the point extent in meters")
        ->check(CLI::NonNegativeNumber);
    heatmap->add_flag("--exclude-endpoints", ha.exclude_endpoints, "Bin only imputed interior days");
    heatmap->add_option("--max-cells", ha.max_cells, "Refuse grids with more cells than this");
    heatmap->add_option("--format", ha.format, "csv, pgm or both")->check(CLI::IsMember({"csv", "pgm", "both"}));

    ValidateArgs va;
    auto* validate_cmd = app.add_subcommand("validate", "Run the numerical self-checks");
    validate_cmd->add_flag("--quick", va.quick, "Coarser quadrature grids");
    validate_cmd->add_option("--seed", va.seed, "Seed for the Monte Carlo oracles");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (impute->parsed()) {
            return cmd_impute(ia, out, err);
        }
        if (heatmap->parsed()) {
            return cmd_heatmap(ha, out, err);
        }
        return cmd_validate(va, out, subjects);
    } catch (const UsageFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace trackimpute::cli
