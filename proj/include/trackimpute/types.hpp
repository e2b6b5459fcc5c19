#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trackimpute {

/// Geographic position in decimal degrees.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Position in the local working frame, meters east/north of the projection origin.
struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

struct Receiver {
    std::string id;
    PlanarPoint position;
    double radius_m = 500.0;

    friend bool operator==(const Receiver&, const Receiver&) = default;
};

/// One realization of the movement-model parameters.
///
/// `beta` is the gap-length threshold separating the decaying angular-noise
/// regime (n <= beta) from the uniformly randomized one (n > beta).
struct ModelParams {
    double alpha = 1.0;
    int beta = 3;
    double gamma = 1.0;
    double phi = 1.0;
    double sigma_r_sq = 1.0;
    double r_m = 500.0;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Latent quantities behind one interior step of a segment.
struct StepLatents {
    int t = 0;
    double theta = 0.0;         // heading toward the segment end point
    double psi = 0.0;           // angular noise
    double d_remaining = 0.0;   // remaining distance used for the step mean
    double dist_draw = 0.0;     // signed step-length draw; the walk moves |dist_draw|
    double sigma_psi_sq = 0.0;  // realized angular-noise variance
    bool coincident = false;    // previous position equalled the end point, theta set to 0
    bool range_violation = false;  // strict mode exhausted its retries inside a receiver range

    friend bool operator==(const StepLatents&, const StepLatents&) = default;
};

/// One gap between two consecutive daily detections of a fish.
/// Day 1 is the start detection and day `T` the end detection.
struct SegmentSpec {
    std::string fish_id;
    int k = 1;
    Receiver start_receiver;
    Receiver end_receiver;
    int T = 2;

    int n() const noexcept { return T - 2; }

    friend bool operator==(const SegmentSpec&, const SegmentSpec&) = default;
};

/// Simulated positions for days 1..T of a segment (stored zero-based) and
/// the latents of the T-2 interior steps.
struct SegmentDraw {
    SegmentSpec spec;
    std::vector<PlanarPoint> positions;
    std::vector<StepLatents> latents;
};

struct TrajectoryDraw {
    std::vector<SegmentDraw> segments;
    ModelParams params;
    double loglik = 0.0;
    std::uint64_t draw_id = 0;
};

}  // namespace trackimpute
