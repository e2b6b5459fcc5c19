#include "trackimpute/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "trackimpute/error.hpp"
#include "trackimpute/geo.hpp"

namespace trackimpute {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

/// Line-oriented reader over a headed CSV; skips blank lines.
class CsvReader {
public:
    CsvReader(std::istream& in, std::string_view expected_header) : in_(in) {
        std::string header;
        while (std::getline(in_, header)) {
            ++line_no_;
            if (line_no_ == 1 && header.starts_with("\xEF\xBB\xBF")) {
                header.erase(0, 3);
            }
            if (!trim(header).empty()) {
                break;
            }
        }
        std::string normalized;
        for (auto f : split_fields(header)) {
            if (!normalized.empty()) {
                normalized += ',';
            }
            normalized += f;
        }
        if (normalized != expected_header) {
            throw ParseError("expected header '" + std::string(expected_header) + "', got '" +
                                 std::string(trim(header)) + "'",
                             line_no_ == 0 ? 1 : line_no_);
        }
        columns_ = split_fields(expected_header).size();
    }

    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            if (trim(line_).empty()) {
                continue;
            }
            fields = split_fields(line_);
            if (fields.size() != columns_) {
                throw ParseError("expected " + std::to_string(columns_) + " fields, got " +
                                     std::to_string(fields.size()),
                                 line_no_);
            }
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::size_t columns_ = 0;
};

double parse_double(std::string_view text, std::string_view what, std::size_t line) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'", line);
    }
    return value;
}

template <typename Int>
bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, Int& out) {
    if (pos + len > text.size()) {
        return false;
    }
    const auto* first = text.data() + pos;
    for (std::size_t i = 0; i < len; ++i) {
        if (first[i] < '0' || first[i] > '9') {
            return false;
        }
    }
    return std::from_chars(first, first + len, out).ec == std::errc{};
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return in;
}

}  // namespace

ReceiverTable::ReceiverTable(GeoPoint origin, std::vector<Receiver> receivers)
    : origin_(origin), receivers_(std::move(receivers)) {}

const Receiver* ReceiverTable::find(std::string_view id) const noexcept {
    const auto it = std::find_if(receivers_.begin(), receivers_.end(),
                                 [&](const Receiver& r) { return r.id == id; });
    return it == receivers_.end() ? nullptr : &*it;
}

const Receiver& ReceiverTable::at(std::string_view id) const {
    if (const auto* r = find(id)) {
        return *r;
    }
    throw ValidationError("unknown receiver id '" + std::string(id) + "'");
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    text = trim(text);
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    int hh = 0;
    int mm = 0;
    int ss = 0;
    if (!parse_fixed(text, 0, 4, y) || text.size() < 16 || text[4] != '-' ||
        !parse_fixed(text, 5, 2, mo) || text[7] != '-' || !parse_fixed(text, 8, 2, d) ||
        (text[10] != 'T' && text[10] != ' ') || !parse_fixed(text, 11, 2, hh) || text[13] != ':' ||
        !parse_fixed(text, 14, 2, mm)) {
        return std::nullopt;
    }
    std::size_t pos = 16;
    long long millis = 0;
    if (pos < text.size() && text[pos] == ':') {
        if (!parse_fixed(text, pos + 1, 2, ss)) {
            return std::nullopt;
        }
        pos += 3;
        if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
            ++pos;
            long long scale = 100;
            std::size_t digits = 0;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                millis += (text[pos] - '0') * scale;
                scale /= 10;
                ++pos;
                ++digits;
            }
            if (digits == 0) {
                return std::nullopt;
            }
        }
    }
    if (pos >= text.size()) {
        return std::nullopt;  // offset is mandatory
    }
    int offset_minutes = 0;
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '-' ? -1 : 1;
        int oh = 0;
        int om = 0;
        if (!parse_fixed(text, pos + 1, 2, oh)) {
            return std::nullopt;
        }
        pos += 3;
        if (pos < text.size()) {
            if (text[pos] == ':') {
                ++pos;
            }
            if (!parse_fixed(text, pos, 2, om)) {
                return std::nullopt;
            }
            pos += 2;
        }
        if (oh > 23 || om > 59) {
            return std::nullopt;
        }
        offset_minutes = sign * (oh * 60 + om);
    } else {
        return std::nullopt;
    }
    if (pos != text.size()) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
        return std::nullopt;
    }
    const auto local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
    return time_point_cast<milliseconds>(local - minutes{offset_minutes});
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_start = floor<days>(ts);
    const year_month_day ymd{day_start};
    const hh_mm_ss tod{ts - day_start};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<int>(tod.subseconds().count()));
    return buf;
}

ReceiverTable parse_receivers(std::istream& in, double radius_m) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) {
        throw ValidationError("detection radius must be positive");
    }
    CsvReader reader(in, "receiver_id,lon,lat");
    std::vector<std::string> ids;
    std::vector<GeoPoint> geo;
    std::set<std::string, std::less<>> seen;
    std::vector<std::string_view> fields;
    while (reader.next(fields)) {
        if (fields[0].empty()) {
            throw ParseError("empty receiver_id", reader.line());
        }
        const GeoPoint p{parse_double(fields[1], "lon", reader.line()),
                         parse_double(fields[2], "lat", reader.line())};
        if (!is_valid(p)) {
            throw ParseError("coordinates out of range", reader.line());
        }
        if (!seen.emplace(fields[0]).second) {
            throw ValidationError("duplicate receiver id '" + std::string(fields[0]) + "'");
        }
        ids.emplace_back(fields[0]);
        geo.push_back(p);
    }
    if (geo.empty()) {
        return {};
    }
    const GeoPoint origin = centroid(geo);
    std::vector<Receiver> receivers;
    receivers.reserve(geo.size());
    for (std::size_t i = 0; i < geo.size(); ++i) {
        receivers.push_back({ids[i], to_planar(geo[i], origin), radius_m});
    }
    return {origin, std::move(receivers)};
}

ReceiverTable parse_receivers(const std::filesystem::path& path, double radius_m) {
    auto in = open_input(path);
    return parse_receivers(in, radius_m);
}

std::vector<DetectionRecord> parse_detections(std::istream& in) {
    CsvReader reader(in, "fish_id,timestamp,receiver_id");
    std::vector<DetectionRecord> out;
    std::vector<std::string_view> fields;
    while (reader.next(fields)) {
        if (fields[0].empty() || fields[2].empty()) {
            throw ParseError("empty fish_id or receiver_id", reader.line());
        }
        const auto ts = parse_timestamp(fields[1]);
        if (!ts) {
            throw ParseError("invalid timestamp '" + std::string(fields[1]) + "'", reader.line());
        }
        out.push_back({std::string(fields[0]), *ts, std::string(fields[2])});
    }
    return out;
}

std::vector<DetectionRecord> parse_detections(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_detections(in);
}

std::vector<DailyDetection> collapse_daily(const std::vector<DetectionRecord>& detections) {
    using std::chrono::days;
    using std::chrono::floor;
    // (fish, utc day) -> kept record
    std::map<std::pair<std::string, days::rep>, const DetectionRecord*> kept;
    for (const auto& rec : detections) {
        const auto day = floor<days>(rec.timestamp).time_since_epoch().count();
        auto [it, inserted] = kept.try_emplace({rec.fish_id, day}, &rec);
        if (!inserted) {
            const auto* cur = it->second;
            if (std::tie(rec.timestamp, rec.receiver_id) > std::tie(cur->timestamp, cur->receiver_id)) {
                it->second = &rec;
            }
        }
    }
    std::vector<DailyDetection> out;
    out.reserve(kept.size());
    const std::string* current_fish = nullptr;
    days::rep first_day = 0;
    for (const auto& [key, rec] : kept) {
        if (current_fish == nullptr || *current_fish != key.first) {
            current_fish = &key.first;
            first_day = key.second;
        }
        out.push_back({key.first, static_cast<int>(key.second - first_day) + 1, rec->receiver_id,
                       rec->timestamp});
    }
    return out;
}

std::vector<SegmentSpec> build_segments(const std::vector<DailyDetection>& daily,
                                        const ReceiverTable& receivers) {
    std::vector<SegmentSpec> segments;
    if (daily.size() < 2) {
        return segments;
    }
    for (std::size_t i = 1; i < daily.size(); ++i) {
        const auto& prev = daily[i - 1];
        const auto& cur = daily[i];
        if (cur.fish_id != prev.fish_id) {
            throw ValidationError("build_segments expects a single fish, got '" + prev.fish_id +
                                  "' and '" + cur.fish_id + "'");
        }
        if (cur.day_index <= prev.day_index) {
            throw ValidationError("daily detections for fish '" + cur.fish_id +
                                  "' are not strictly increasing in day");
        }
        segments.push_back({cur.fish_id, static_cast<int>(i), receivers.at(prev.receiver_id),
                            receivers.at(cur.receiver_id), cur.day_index - prev.day_index + 1});
    }
    return segments;
}

}  // namespace trackimpute
