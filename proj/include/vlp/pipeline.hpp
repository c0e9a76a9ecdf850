#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "vlp/calibration.hpp"
#include "vlp/decode.hpp"
#include "vlp/geometry.hpp"
#include "vlp/rng.hpp"
#include "vlp/scene.hpp"
#include "vlp/vision.hpp"

namespace vlp {

// Everything a simulated experiment needs: the believed camera model, the
// injected truth and the acquisition protocol knobs.
struct Scenario {
    LedRegistry registry;
    CameraIntrinsics nominal;
    Vec2 true_offset_px;  // real principal point = nominal + offset
    RollingShutterConfig rs;
    NoiseModel noise;
    double camera_z_cm = 0.0;
    // The beacons mark the platform corners; its world-frame origin need not
    // be (0, 0).
    double platform_x0_cm = 13.0;
    double platform_y0_cm = 13.0;
    double platform_w_cm = 146.0;
    double platform_l_cm = 146.0;

    // Calibration acquisition.
    int dispersion_samples = 432;
    int rotation_steps = 12;      // one capture every 360/steps degrees
    int rotation_target_id = 0;   // 0 = lowest registered id
    Vec2 rotation_position{86.0, 86.0};

    CameraIntrinsics true_intrinsics() const;
    CameraHeight camera_height() const;
    bool pose_in_platform(const Pose2D& pose) const;
};

RoiParams default_roi_params(const LedRegistry& registry, const RollingShutterConfig& rs);

// One simulated capture: true intrinsics, a random stripe phase and a noise
// stream both derived from `seed`.
Frame render_capture(const Scenario& scenario, const Pose2D& pose, uint64_t seed);

struct BeaconObservation {
    int id = 0;
    PixelPoint pixel_centroid;
    ImagePoint image_centroid;
    double period_confidence = 0.0;
};

struct PositionFix {
    Pose2D pose;
    std::pair<int, int> led_pair{0, 0};
    std::vector<BeaconObservation> beacons;  // all decoded lamps, ascending id
    int threshold = 0;
    uint64_t frame_seed = 0;
};

// The two decoded beacons with the widest image separation, ordered by
// ascending id. Throws insufficient_beacons.
std::pair<DecodedLed, DecodedLed> select_led_pair(const std::vector<DecodedLed>& detections);

struct LocateOptions {
    RoiParams roi;
    DecodeParams decode;
    // Measurement-channel jitter added to decoded centroids (evaluation only).
    double centroid_jitter_sigma_px = 0.0;
    Rng* jitter_rng = nullptr;
    // When set, ROI windows come from track_step instead of a full-frame scan.
    std::vector<TrackState>* tracks = nullptr;
    TrackerParams tracker;
};

// Full pipeline for one frame: threshold, ROI extraction (or tracking),
// stripe decode, pair selection, two-beacon solve.
PositionFix locate(const Frame& frame, const LedRegistry& registry, const CameraIntrinsics& k,
                   const CameraHeight& height, const RollingShutterConfig& rs,
                   const LocateOptions& opts = {});

enum class CalibrationMethod { none, rotation, dispersion };

const char* calibration_method_name(CalibrationMethod m);
CalibrationMethod parse_calibration_method(const std::string& name);

struct CalibrationOutcome {
    CameraIntrinsics corrected;
    PixelPoint corrected_point;
    CalibrationMethod method = CalibrationMethod::none;
    // Recorded samples: image mm for the rotation method, world-cm fixes for
    // the dispersion method.
    std::vector<Vec2> samples;
    // Dispersion method reports both circle centres; the mean drives the
    // correction, the enclosing-circle centre is informational.
    Vec2 mean_delta;
    Vec2 min_circle_delta;
};

// Runs the acquisition protocol in simulation (rotating captures or repeated
// origin fixes) and returns intrinsics with the corrected principal point.
CalibrationOutcome calibrate_end_to_end(CalibrationMethod method, const Scenario& scenario,
                                        uint64_t seed);

enum class ThetaMode { fixed, uniform };

struct GridSpec {
    std::vector<Pose2D> points;
    int trials_per_point = 12;

    // nx*ny even grid with `margin_cm` kept clear on every side; yaw fixed or
    // drawn uniformly per point from the seed.
    static GridSpec even_grid(int nx, int ny, double margin_cm, const Scenario& scenario,
                              ThetaMode mode, double theta_fixed, uint64_t seed);

    // Bounds plus two-beacon visibility at every point.
    void validate(const Scenario& scenario) const;
};

struct TrialRecord {
    int point_index = 0;
    int trial_index = 0;
    uint64_t seed = 0;
    Pose2D ground_truth;
    Pose2D estimated;
    double error_cm = 0.0;  // planar Euclidean; yaw error reported separately
    double theta_error_rad = 0.0;
    bool ok = false;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::optional<CalibrationOutcome> calibration;
};

// Renders and locates every grid point x trial with per-trial seeds derived
// from `master_seed`; calibration (when requested) runs once beforehand.
// Deterministic; trials may execute on multiple threads.
ExperimentResult run_grid_experiment(const GridSpec& grid, const Scenario& scenario,
                                     CalibrationMethod method, uint64_t master_seed);

// Throws experiment_failed when more than max_failure_fraction of the trials
// produced no fix.
void require_failure_budget(const std::vector<TrialRecord>& records,
                            double max_failure_fraction = 0.01);

struct ErrorStats {
    double mean_cm = 0.0;
    double p90_cm = 0.0;  // smallest error whose empirical CDF reaches 0.9
    double max_cm = 0.0;
    std::vector<std::pair<double, double>> cdf;  // (error, cumulative fraction)
    struct HistBin {
        double lo = 0.0;
        double hi = 0.0;
        long long count = 0;
    };
    std::vector<HistBin> histogram;  // fixed 0.2 cm bins over [0, max]
    size_t samples = 0;
    size_t failures = 0;
};

inline constexpr double kHistogramBinWidthCm = 0.2;

ErrorStats compute_stats(const std::vector<TrialRecord>& records);

// Bit-exact column order:
// point_index,trial_index,seed,gt_x,gt_y,gt_theta,est_x,est_y,est_theta,error_cm,status
void write_results_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void write_stats_csv(const ErrorStats& stats, std::ostream& out);

// `sample_index,x,y` log with a unit-comment header.
void write_samples_csv(const std::vector<Vec2>& samples, const std::string& unit_note,
                       std::ostream& out);

// Published grid-experiment statistics, for report comparison only; the
// simulator does not reproduce the absolute numbers.
struct ReferenceStats {
    double mean_cm;
    double p90_cm;
    double max_cm;
};
ReferenceStats reference_stats(CalibrationMethod method);

// Simple index-parallel map; f(i) must only touch slot i of shared state.
void parallel_for(size_t n, const std::function<void(size_t)>& f);

}  // namespace vlp
