#include "trackimpute/heatmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "trackimpute/error.hpp"
#include "trackimpute/geo.hpp"

namespace trackimpute {

namespace {

template <typename Fn>
void for_each_binned(std::span<const TrajectoryDraw> draws, bool include_endpoints, Fn&& fn) {
    for (const auto& draw : draws) {
        for (const auto& seg : draw.segments) {
            const std::size_t n = seg.positions.size();
            for (std::size_t i = 0; i < n; ++i) {
                if (!include_endpoints && (i == 0 || i + 1 == n)) {
                    continue;
                }
                fn(seg.positions[i]);
            }
        }
    }
}

struct Extent {
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    std::size_t points = 0;
};

Extent extent_of(std::span<const TrajectoryDraw> draws, bool include_endpoints) {
    Extent e;
    for_each_binned(draws, include_endpoints, [&](const PlanarPoint& p) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("cannot bin a non-finite position");
        }
        e.min_x = std::min(e.min_x, p.x);
        e.min_y = std::min(e.min_y, p.y);
        e.max_x = std::max(e.max_x, p.x);
        e.max_y = std::max(e.max_y, p.y);
        ++e.points;
    });
    return e;
}

struct Layout {
    PlanarPoint origin;
    double ncols = 0.0;
    double nrows = 0.0;
};

Layout layout_of(const Extent& e, const HeatmapOptions& options) {
    if (!(options.cell_m > 0.0) || !std::isfinite(options.cell_m)) {
        throw ValidationError("heatmap cell size must be positive");
    }
    if (!(options.padding_m >= 0.0) || !std::isfinite(options.padding_m)) {
        throw ValidationError("heatmap padding must be nonnegative");
    }
    Layout l;
    l.origin = {e.min_x - options.padding_m, e.min_y - options.padding_m};
    l.ncols = std::floor((e.max_x + options.padding_m - l.origin.x) / options.cell_m) + 1.0;
    l.nrows = std::floor((e.max_y + options.padding_m - l.origin.y) / options.cell_m) + 1.0;
    return l;
}

std::size_t cell_index(double v, double origin, double cell, std::size_t n) {
    const double idx = std::floor((v - origin) / cell);
    if (idx <= 0.0) {
        return 0;
    }
    return std::min(static_cast<std::size_t>(idx), n - 1);
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* what) {
    T value{};
    text = trim(text);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(text) + "'", line);
    }
    return value;
}

constexpr std::string_view kTrajectoryHeader = "draw_id,segment_k,t,x_m,y_m,lon,lat,loglik";

}  // namespace

std::uint64_t HeatmapGrid::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::size_t heatmap_cell_count(std::span<const TrajectoryDraw> draws, const HeatmapOptions& options) {
    const auto e = extent_of(draws, options.include_endpoints);
    if (e.points == 0) {
        return 0;
    }
    const auto l = layout_of(e, options);
    const double cells = l.ncols * l.nrows;
    return cells >= static_cast<double>(std::numeric_limits<std::size_t>::max())
               ? std::numeric_limits<std::size_t>::max()
               : static_cast<std::size_t>(cells);
}

HeatmapGrid build_heatmap(std::span<const TrajectoryDraw> draws, const HeatmapOptions& options) {
    if (draws.empty()) {
        throw ValidationError("cannot build a heatmap from zero draws");
    }
    const auto e = extent_of(draws, options.include_endpoints);
    if (e.points == 0) {
        throw ValidationError("no positions to bin");
    }
    const auto l = layout_of(e, options);
    if (l.ncols * l.nrows > static_cast<double>(options.max_cells)) {
        throw ValidationError("heatmap of " + format_value(l.ncols) + " x " + format_value(l.nrows) +
                              " cells exceeds the limit of " + std::to_string(options.max_cells) +
                              "; use a larger cell size");
    }
    HeatmapGrid grid;
    grid.origin = l.origin;
    grid.cell_m = options.cell_m;
    grid.ncols = static_cast<std::size_t>(l.ncols);
    grid.nrows = static_cast<std::size_t>(l.nrows);
    grid.counts.assign(grid.ncols * grid.nrows, 0);
    for_each_binned(draws, options.include_endpoints, [&](const PlanarPoint& p) {
        const auto col = cell_index(p.x, grid.origin.x, grid.cell_m, grid.ncols);
        const auto row = cell_index(p.y, grid.origin.y, grid.cell_m, grid.nrows);
        ++grid.counts[row * grid.ncols + col];
    });
    return grid;
}

std::string format_coordinate(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_trajectories(std::ostream& out, std::span<const TrajectoryDraw> draws, const GeoPoint& origin) {
    out << kTrajectoryHeader << '\n';
    for (const auto& draw : draws) {
        const std::string loglik = format_value(draw.loglik);
        for (const auto& seg : draw.segments) {
            for (std::size_t i = 0; i < seg.positions.size(); ++i) {
                const auto& p = seg.positions[i];
                const auto g = to_geo(p, origin);
                out << draw.draw_id << ',' << seg.spec.k << ',' << (i + 1) << ',' << format_coordinate(p.x) << ','
                    << format_coordinate(p.y) << ',' << format_value(g.lon) << ',' << format_value(g.lat) << ','
                    << loglik << '\n';
            }
        }
    }
}

void export_trajectories(std::span<const TrajectoryDraw> draws, const GeoPoint& origin,
                         const std::filesystem::path& path) {
    auto out = open_output(path);
    write_trajectories(out, draws, origin);
    finish(out, path);
}

std::vector<TrajectoryDraw> read_trajectories(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            break;
        }
    }
    if (trim(line) != kTrajectoryHeader) {
        throw ParseError("expected header '" + std::string(kTrajectoryHeader) + "'", std::max<std::size_t>(line_no, 1));
    }
    std::vector<TrajectoryDraw> draws;
    std::map<std::uint64_t, std::size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string_view> f;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            f.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (f.size() != 8) {
            throw ParseError("expected 8 fields, got " + std::to_string(f.size()), line_no);
        }
        const auto id = parse_field<std::uint64_t>(f[0], line_no, "draw_id");
        const auto k = parse_field<int>(f[1], line_no, "segment_k");
        const auto t = parse_field<int>(f[2], line_no, "t");
        const PlanarPoint p{parse_field<double>(f[3], line_no, "x_m"), parse_field<double>(f[4], line_no, "y_m")};
        const auto loglik = parse_field<double>(f[7], line_no, "loglik");

        auto [it, inserted] = index.try_emplace(id, draws.size());
        if (inserted) {
            draws.emplace_back();
            draws.back().draw_id = id;
            draws.back().loglik = loglik;
        } else if (it->second + 1 != draws.size()) {
            throw ParseError("rows of draw " + std::to_string(id) + " are not contiguous", line_no);
        }
        auto& draw = draws[it->second];
        if (draw.segments.empty() || draw.segments.back().spec.k != k) {
            const int expected_k = draw.segments.empty() ? k : draw.segments.back().spec.k + 1;
            if (k != expected_k || t != 1) {
                throw ParseError("unexpected segment " + std::to_string(k) + " at t=" + std::to_string(t), line_no);
            }
            draw.segments.emplace_back();
            draw.segments.back().spec.k = k;
        }
        auto& seg = draw.segments.back();
        if (t != static_cast<int>(seg.positions.size()) + 1) {
            throw ParseError("t=" + std::to_string(t) + " out of sequence", line_no);
        }
        seg.positions.push_back(p);
        seg.spec.T = static_cast<int>(seg.positions.size());
    }
    return draws;
}

std::vector<TrajectoryDraw> read_trajectories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return read_trajectories(in);
}

void write_heatmap(std::ostream& out, const HeatmapGrid& grid, HeatmapFormat format) {
    if (format == HeatmapFormat::Csv) {
        out << "row,col,count\n";
        for (std::size_t r = 0; r < grid.nrows; ++r) {
            for (std::size_t c = 0; c < grid.ncols; ++c) {
                out << r << ',' << c << ',' << grid.counts[r * grid.ncols + c] << '\n';
            }
        }
        return;
    }
    out << "P5\n" << grid.ncols << ' ' << grid.nrows << "\n65535\n";
    std::vector<char> row_bytes(grid.ncols * 2);
    for (std::size_t r = grid.nrows; r-- > 0;) {
        for (std::size_t c = 0; c < grid.ncols; ++c) {
            const auto v = static_cast<std::uint16_t>(std::min<std::uint64_t>(grid.counts[r * grid.ncols + c], 65535));
            row_bytes[2 * c] = static_cast<char>(v >> 8);
            row_bytes[2 * c + 1] = static_cast<char>(v & 0xff);
        }
        out.write(row_bytes.data(), static_cast<std::streamsize>(row_bytes.size()));
    }
}

void export_heatmap(const HeatmapGrid& grid, const std::filesystem::path& path, HeatmapFormat format) {
    auto out = open_output(path, format == HeatmapFormat::Pgm ? std::ios::out | std::ios::binary : std::ios::out);
    write_heatmap(out, grid, format);
    finish(out, path);
}

}  // namespace trackimpute
