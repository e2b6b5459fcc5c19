#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trackimpute/types.hpp"

namespace trackimpute {

/// Occupancy counts on a regular grid. Row 0 is the southern row and
/// `origin` is the lower-left corner of cell (0, 0).
struct HeatmapGrid {
    PlanarPoint origin;
    double cell_m = 1.0;
    std::size_t ncols = 0;
    std::size_t nrows = 0;
    std::vector<std::uint64_t> counts;  // row-major

    std::uint64_t at(std::size_t row, std::size_t col) const { return counts.at(row * ncols + col); }
    std::uint64_t total() const noexcept;

    friend bool operator==(const HeatmapGrid&, const HeatmapGrid&) = default;
};

struct HeatmapOptions {
    double cell_m = 250.0;
    double padding_m = 1000.0;
    bool include_endpoints = true;
    /// Grids larger than this are refused instead of allocated.
    std::size_t max_cells = std::size_t{1} << 22;
};

enum class HeatmapFormat { Csv, Pgm };

/// Bins every position of every draw. Points on a cell edge go to the
/// higher-index cell. Throws ValidationError for empty input, a non-positive
/// cell size, or a grid above options.max_cells.
HeatmapGrid build_heatmap(std::span<const TrajectoryDraw> draws, const HeatmapOptions& options);

/// Cell count build_heatmap would allocate, or 0 when there are no points.
std::size_t heatmap_cell_count(std::span<const TrajectoryDraw> draws, const HeatmapOptions& options);

/// Header `draw_id,segment_k,t,x_m,y_m,lon,lat,loglik`, one row per stored
/// position. A day shared by two segments appears once per segment.
void write_trajectories(std::ostream& out, std::span<const TrajectoryDraw> draws, const GeoPoint& origin);
void export_trajectories(std::span<const TrajectoryDraw> draws, const GeoPoint& origin,
                         const std::filesystem::path& path);

/// Parses a trajectory CSV back into draws (positions, segment structure and
/// loglik only; latents and receivers are not stored in the file).
std::vector<TrajectoryDraw> read_trajectories(std::istream& in);
std::vector<TrajectoryDraw> read_trajectories(const std::filesystem::path& path);

/// CSV is long form `row,col,count`. PGM is binary 16-bit with counts clamped
/// at 65535 and the northern row first.
void write_heatmap(std::ostream& out, const HeatmapGrid& grid, HeatmapFormat format);
void export_heatmap(const HeatmapGrid& grid, const std::filesystem::path& path, HeatmapFormat format);

/// Shortest round-trip decimal for coordinates, `%.9g` elsewhere.
std::string format_coordinate(double v);
std::string format_value(double v);

}  // namespace trackimpute
