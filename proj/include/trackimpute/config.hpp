#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "trackimpute/bootstrap.hpp"
#include "trackimpute/heatmap.hpp"
#include "trackimpute/movement.hpp"

namespace trackimpute {

/// Everything a run needs besides its input files. Serialized as JSON; see docs/config.md.
struct RunConfig {
    PriorConfig priors;
    std::size_t n_iter = 5000;
    double keep_frac = 0.9;
    std::optional<std::uint64_t> seed;
    double detection_radius_m = 500.0;
    RemainingDistanceMode remaining_distance_mode = RemainingDistanceMode::Literal;
    Floors floors;
    bool enforce_endpoint_radius = false;
    bool reject_interior_in_range = false;
    int interior_retry_cap = 1000;
    HeatmapOptions heatmap;
    unsigned threads = 0;
};

std::string to_string(RemainingDistanceMode mode);
RemainingDistanceMode parse_remaining_distance_mode(std::string_view text);

/// Missing keys keep their defaults; unknown keys and bad values throw ValidationError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string dump_config(const RunConfig& config);

/// Throws ValidationError when any field is out of range.
void validate(const RunConfig& config);

}  // namespace trackimpute
