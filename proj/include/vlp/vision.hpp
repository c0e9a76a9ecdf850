#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vlp/scene.hpp"

namespace vlp {

struct GrayHistogram {
    std::array<uint64_t, 256> counts{};

    uint64_t total() const;
};

GrayHistogram histogram(const Frame& frame);

struct OtsuResult {
    int threshold = 0;
    // All mass sits at a single level; the threshold is that level and no
    // foreground/background split exists.
    bool degenerate = false;
};

// Threshold maximizing the between-class variance w0*w1*(mu0-mu1)^2 over the
// splits [0..t] / [t+1..255], t in [0, 254]. Score comparisons are exact
// (integer arithmetic), and ties resolve to the floor of the midpoint of the
// longest contiguous run of maximizers (earliest run on equal length).
// A pixel is foreground when its value is strictly greater than the threshold.
OtsuResult otsu_threshold(const GrayHistogram& h);

struct RoiWindow {
    int x = 0;  // top-left, px
    int y = 0;
    int w = 0;
    int h = 0;
    PixelPoint centroid;  // intensity-weighted, sub-pixel
    long long area = 0;   // component pixel count after closing

    bool contains(const PixelPoint& p) const {
        return p.i >= x && p.i <= x + w && p.j >= y && p.j <= y + h;
    }
};

struct RoiParams {
    long long min_area = 64;   // px^2
    int min_roi_size = 8;      // px, minimum window side
    // Vertical structuring-element height for morphological closing. Must be
    // at least one stripe half-period plus one so dark stripes never split a
    // lamp; configs use 2x the longest half-period.
    int closing_height = 33;
};

// Binarize at t (foreground > t), close vertically, label 8-connected
// components, drop small ones, return windows sorted by area descending.
// Centroids weight original pixels by their excess over the threshold, which
// makes the result invariant under a uniform brightness shift.
std::vector<RoiWindow> extract_rois(const Frame& frame, int threshold, const RoiParams& params);

// Bhattacharyya coefficient sum sqrt(p*q) of two normalized histograms.
// Throws not_normalized unless both sum to 1 within 1e-9.
double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q);

struct TrackerParams {
    double process_noise = 1.0;       // q, px^2/frame^2
    double measurement_noise = 4.0;   // R0, px^2
    double initial_covariance = 25.0;
    double gate_scale = 1.5;          // search window = predicted centroid +- gate
    double bhattacharyya_floor = 0.3; // below this, coast on prediction
    double noise_epsilon = 0.01;      // R = (1 - B + eps) * R0
    int max_mean_shift_iters = 20;
    double mean_shift_tol_px = 0.5;
    int max_coast_frames = 5;
    int histogram_bins = 32;
    int min_window = 8;
};

struct TrackState {
    // (cx, cy, vx, vy) in px and px/frame.
    std::array<double, 4> state{};
    std::array<double, 16> covariance{};  // row-major 4x4, symmetric PSD
    std::vector<double> reference_histogram;
    double last_bhattacharyya = 1.0;
    int threshold = 0;  // binarization level frozen at init
    int window_w = 0;   // mean-shift kernel size, from the seeding ROI
    int window_h = 0;
    int coast_count = 0;
    // Pixels read from the frame during the last step; bounded by the gate.
    long long last_processed_pixels = 0;
};

TrackState init_track(const Frame& frame, const RoiWindow& roi, int threshold,
                      const TrackerParams& params = {});

struct TrackStepResult {
    RoiWindow window;
    bool coasted = false;
};

// Kalman predict (constant velocity), mean-shift correction inside the gated
// sub-window, Bhattacharyya-weighted update. Only the gate's pixels are read.
// Throws track_lost after max_coast_frames consecutive coasts.
TrackStepResult track_step(TrackState& state, const Frame& frame,
                           const TrackerParams& params = {});

}  // namespace vlp
