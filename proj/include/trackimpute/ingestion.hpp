#pragma once

#include <chrono>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackimpute/types.hpp"

namespace trackimpute {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Receivers projected into a local planar frame anchored at their centroid.
class ReceiverTable {
public:
    ReceiverTable() = default;
    ReceiverTable(GeoPoint origin, std::vector<Receiver> receivers);

    const GeoPoint& origin() const noexcept { return origin_; }
    const std::vector<Receiver>& receivers() const noexcept { return receivers_; }
    std::size_t size() const noexcept { return receivers_.size(); }
    bool empty() const noexcept { return receivers_.empty(); }

    const Receiver* find(std::string_view id) const noexcept;
    /// Throws ValidationError naming the id when absent.
    const Receiver& at(std::string_view id) const;

private:
    GeoPoint origin_;
    std::vector<Receiver> receivers_;
};

struct DetectionRecord {
    std::string fish_id;
    Timestamp timestamp;
    std::string receiver_id;

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// The detection kept for one fish on one UTC calendar day.
struct DailyDetection {
    std::string fish_id;
    int day_index = 1;  // 1 on the fish's first detected day
    std::string receiver_id;
    Timestamp timestamp;  // of the detection that was kept

    friend bool operator==(const DailyDetection&, const DailyDetection&) = default;
};

/// Parses ISO 8601 date-times with a `Z` or numeric UTC offset,
/// e.g. `2018-09-01T17:00:00-04:00`. Returns nullopt when malformed.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SS.sssZ`.
std::string format_timestamp(Timestamp ts);

/// Reads a `receiver_id,lon,lat` CSV. Every receiver gets `radius_m`.
ReceiverTable parse_receivers(std::istream& in, double radius_m = 500.0);
ReceiverTable parse_receivers(const std::filesystem::path& path, double radius_m = 500.0);

/// Reads a `fish_id,timestamp,receiver_id` CSV.
std::vector<DetectionRecord> parse_detections(std::istream& in);
std::vector<DetectionRecord> parse_detections(const std::filesystem::path& path);

/// Keeps the latest detection per fish per UTC day. Output is sorted by
/// (fish_id, day_index). Equal timestamps resolve to the larger receiver id.
std::vector<DailyDetection> collapse_daily(const std::vector<DetectionRecord>& detections);

/// Splits one fish's daily record into consecutive-detection segments.
/// Fewer than two detections yields no segments.
std::vector<SegmentSpec> build_segments(const std::vector<DailyDetection>& daily,
                                        const ReceiverTable& receivers);

}  // namespace trackimpute
