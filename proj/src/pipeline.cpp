#include "vlp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace vlp {

namespace {

// Seed-stream tags so calibration, trials and jitter never share a stream.
constexpr uint64_t kCalibrationStream = 0xCA11B001ULL;
constexpr uint64_t kTrialStream = 0x7E57AB1EULL;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

CameraIntrinsics Scenario::true_intrinsics() const {
    CameraIntrinsics k = nominal;
    k.principal_point.i += true_offset_px.x;
    k.principal_point.j += true_offset_px.y;
    return k;
}

CameraHeight Scenario::camera_height() const {
    return {registry.plane_z_cm() - camera_z_cm};
}

bool Scenario::pose_in_platform(const Pose2D& pose) const {
    return pose.x >= platform_x0_cm && pose.x <= platform_x0_cm + platform_w_cm &&
           pose.y >= platform_y0_cm && pose.y <= platform_y0_cm + platform_l_cm;
}

RoiParams default_roi_params(const LedRegistry& registry, const RollingShutterConfig& rs) {
    RoiParams p;
    if (!registry.empty()) {
        // Closing must bridge the longest dark run: twice the longest
        // half-period, kept odd for a centred structuring element.
        const int max_period = static_cast<int>(std::ceil(max_expected_period_rows(registry, rs)));
        p.closing_height = max_period | 1;
    }
    return p;
}

std::pair<DecodedLed, DecodedLed> select_led_pair(const std::vector<DecodedLed>& detections) {
    require(detections.size() >= 2, errc::insufficient_beacons,
            "need two decoded beacons, saw " + std::to_string(detections.size()));
    size_t best_a = 0, best_b = 1;
    double best_sep = -1.0;
    for (size_t a = 0; a < detections.size(); ++a)
        for (size_t b = a + 1; b < detections.size(); ++b) {
            const double sep = std::hypot(detections[a].image_centroid.u - detections[b].image_centroid.u,
                                          detections[a].image_centroid.v - detections[b].image_centroid.v);
            if (sep > best_sep) {
                best_sep = sep;
                best_a = a;
                best_b = b;
            }
        }
    DecodedLed first = detections[best_a];
    DecodedLed second = detections[best_b];
    if (first.id > second.id) std::swap(first, second);
    return {first, second};
}

namespace {

std::vector<DecodedLed> decode_frame(const Frame& frame, const LedRegistry& registry,
                                     const CameraIntrinsics& k, const RollingShutterConfig& rs,
                                     const LocateOptions& opts, int* threshold_out) {
    const OtsuResult otsu = otsu_threshold(histogram(frame));
    if (threshold_out) *threshold_out = otsu.threshold;
    if (otsu.degenerate) return {};

    std::vector<RoiWindow> rois;
    if (opts.tracks && !opts.tracks->empty()) {
        for (auto& track : *opts.tracks)
            rois.push_back(track_step(track, frame, opts.tracker).window);
    } else {
        rois = extract_rois(frame, otsu.threshold, opts.roi);
        if (opts.tracks)
            for (const auto& roi : rois)
                opts.tracks->push_back(init_track(frame, roi, otsu.threshold, opts.tracker));
    }

    std::vector<DecodedLed> decoded;
    for (const auto& roi : rois) {
        try {
            DecodedLed led = decode_roi(frame, roi, otsu.threshold, registry, rs, k, opts.decode);
            const bool duplicate = std::any_of(decoded.begin(), decoded.end(),
                                               [&](const DecodedLed& d) { return d.id == led.id; });
            if (!duplicate) decoded.push_back(led);
        } catch (const Error&) {
            // Undecodable windows (unknown id, aperiodic, too small) are skipped.
        }
    }

    if (opts.centroid_jitter_sigma_px > 0 && opts.jitter_rng) {
        for (auto& led : decoded) {
            led.pixel_centroid.i += opts.centroid_jitter_sigma_px * opts.jitter_rng->next_gaussian();
            led.pixel_centroid.j += opts.centroid_jitter_sigma_px * opts.jitter_rng->next_gaussian();
            led.image_centroid = pixel_to_image(led.pixel_centroid, k);
        }
    }
    std::sort(decoded.begin(), decoded.end(),
              [](const DecodedLed& a, const DecodedLed& b) { return a.id < b.id; });
    return decoded;
}

}  // namespace

PositionFix locate(const Frame& frame, const LedRegistry& registry, const CameraIntrinsics& k,
                   const CameraHeight& height, const RollingShutterConfig& rs,
                   const LocateOptions& opts) {
    PositionFix fix;
    fix.frame_seed = frame.seed;
    const std::vector<DecodedLed> decoded =
        decode_frame(frame, registry, k, rs, opts, &fix.threshold);

    for (const auto& led : decoded)
        fix.beacons.push_back({led.id, led.pixel_centroid, led.image_centroid,
                               led.period.confidence});

    const auto [first, second] = select_led_pair(decoded);
    fix.led_pair = {first.id, second.id};
    fix.pose = position_from_two_leds({first.id, first.world}, {second.id, second.world},
                                      first.image_centroid, second.image_centroid, k, height);
    return fix;
}

const char* calibration_method_name(CalibrationMethod m) {
    switch (m) {
        case CalibrationMethod::none: return "none";
        case CalibrationMethod::rotation: return "rotation";
        case CalibrationMethod::dispersion: return "dispersion";
    }
    return "none";
}

CalibrationMethod parse_calibration_method(const std::string& name) {
    if (name == "none") return CalibrationMethod::none;
    if (name == "rotation") return CalibrationMethod::rotation;
    if (name == "dispersion") return CalibrationMethod::dispersion;
    fail(errc::validation, "unknown calibration method `" + name + "`");
}

namespace {

// Random capture phase; beacons are asynchronous, so every capture sees an
// independent stripe alignment.
double random_phase(Rng& rng, const LedRegistry& registry) {
    double slowest = 0.01;
    for (const auto& f : registry.fixtures())
        slowest = std::max(slowest, 1.0 / f.mod_frequency_hz);
    return rng.uniform(0.0, slowest);
}

}  // namespace

Frame render_capture(const Scenario& sc, const Pose2D& pose, uint64_t seed) {
    Rng rng(seed);
    RollingShutterConfig rs = sc.rs;
    rs.frame_start_time_s = random_phase(rng, sc.registry);
    NoiseModel noise = sc.noise;
    noise.seed = derive_seed(seed, 1);
    Frame frame = render_frame(sc.registry, pose, sc.true_intrinsics(), rs, noise, sc.camera_height());
    frame.seed = seed;
    return frame;
}

CalibrationOutcome calibrate_end_to_end(CalibrationMethod method, const Scenario& sc,
                                        uint64_t seed) {
    CalibrationOutcome out;
    out.method = method;
    out.corrected = sc.nominal;
    out.corrected_point = sc.nominal.principal_point;
    if (method == CalibrationMethod::none) return out;

    const CameraHeight height = sc.camera_height();

    if (method == CalibrationMethod::dispersion) {
        require(sc.dispersion_samples >= 1, errc::validation,
                "dispersion calibration needs at least one sample");
        const Pose2D origin{0.0, 0.0, 0.0};
        std::vector<std::optional<Vec2>> fixes(static_cast<size_t>(sc.dispersion_samples));
        parallel_for(fixes.size(), [&](size_t s) {
            const uint64_t capture_seed = derive_seed(seed, kCalibrationStream + s);
            const Frame frame = render_capture(sc, origin, capture_seed);
            Rng jitter(derive_seed(capture_seed, 2));
            LocateOptions opts;
            opts.roi = default_roi_params(sc.registry, sc.rs);
            opts.centroid_jitter_sigma_px = sc.noise.centroid_jitter_sigma;
            opts.jitter_rng = &jitter;
            try {
                const PositionFix fix =
                    locate(frame, sc.registry, sc.nominal, height, sc.rs, opts);
                fixes[s] = {fix.pose.x, fix.pose.y};
            } catch (const Error&) {
                // A capture with no usable fix is dropped, like any other bad
                // measurement in the protocol.
            }
        });
        for (const auto& fix : fixes)
            if (fix) out.samples.push_back(*fix);
        require(out.samples.size() * 2 >= fixes.size(), errc::experiment_failed,
                "more than half of the dispersion captures produced no fix");
        const DispersionResult by_mean =
            dispersion_correct(out.samples, sc.nominal, height, DispersionCenter::mean);
        out.mean_delta = by_mean.delta;
        out.min_circle_delta =
            dispersion_correct(out.samples, sc.nominal, height, DispersionCenter::min_circle)
                .delta;
        out.corrected_point = by_mean.corrected_point;
    } else {
        require(sc.rotation_steps >= 3, errc::insufficient_samples,
                "rotation calibration needs at least 3 captures");
        int target_id = sc.rotation_target_id;
        if (target_id == 0) target_id = sc.registry.fixtures().front().id;
        require(sc.registry.has_id(target_id), errc::unknown_id,
                "rotation target id is not registered");

        std::vector<std::optional<Vec2>> recorded(static_cast<size_t>(sc.rotation_steps));
        parallel_for(recorded.size(), [&](size_t s) {
            const double theta = normalize_angle(2.0 * M_PI * static_cast<double>(s) /
                                                 sc.rotation_steps);
            const Pose2D pose{sc.rotation_position.x, sc.rotation_position.y, theta};
            const uint64_t capture_seed = derive_seed(seed, kCalibrationStream + 0x1000 + s);
            const Frame frame = render_capture(sc, pose, capture_seed);
            Rng jitter(derive_seed(capture_seed, 2));
            LocateOptions opts;
            opts.roi = default_roi_params(sc.registry, sc.rs);
            opts.centroid_jitter_sigma_px = sc.noise.centroid_jitter_sigma;
            opts.jitter_rng = &jitter;
            int threshold = 0;
            const std::vector<DecodedLed> decoded =
                decode_frame(frame, sc.registry, sc.nominal, sc.rs, opts, &threshold);
            for (const auto& led : decoded)
                if (led.id == target_id) recorded[s] = {led.image_centroid.u, led.image_centroid.v};
        });
        for (const auto& sample : recorded)
            if (sample) out.samples.push_back(*sample);
        out.corrected_point = rotation_calibrate(out.samples, sc.nominal);
    }

    out.corrected.principal_point = out.corrected_point;
    return out;
}

GridSpec GridSpec::even_grid(int nx, int ny, double margin_cm, const Scenario& sc,
                             ThetaMode mode, double theta_fixed, uint64_t seed) {
    require(nx >= 1 && ny >= 1, errc::validation, "grid must have at least one point per axis");
    Rng rng(derive_seed(seed, 0x6121D));
    GridSpec grid;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            Pose2D pose;
            pose.x = sc.platform_x0_cm +
                     (nx == 1 ? sc.platform_w_cm / 2
                              : margin_cm + ix * (sc.platform_w_cm - 2 * margin_cm) / (nx - 1));
            pose.y = sc.platform_y0_cm +
                     (ny == 1 ? sc.platform_l_cm / 2
                              : margin_cm + iy * (sc.platform_l_cm - 2 * margin_cm) / (ny - 1));
            pose.theta = mode == ThetaMode::fixed ? normalize_angle(theta_fixed)
                                                  : rng.uniform(-M_PI, M_PI);
            grid.points.push_back(pose);
        }
    }
    grid.validate(sc);
    return grid;
}

void GridSpec::validate(const Scenario& sc) const {
    require(trials_per_point >= 1, errc::validation, "trials per point must be >= 1");
    const CameraIntrinsics k = sc.true_intrinsics();
    const CameraHeight height = sc.camera_height();
    for (size_t i = 0; i < points.size(); ++i) {
        const Pose2D& pose = points[i];
        require(sc.pose_in_platform(pose), errc::validation,
                "grid point " + std::to_string(i) + " lies outside the platform");
        int visible = 0;
        for (const auto& fixture : sc.registry.fixtures()) {
            const DiscProjection disc = disc_projection(fixture, pose, k, height);
            if (disc.center.i - disc.radius_px >= 0 && disc.center.j - disc.radius_px >= 0 &&
                disc.center.i + disc.radius_px <= k.width &&
                disc.center.j + disc.radius_px <= k.height)
                ++visible;
        }
        require(visible >= 2, errc::validation,
                "grid point " + std::to_string(i) + " sees fewer than two beacons");
    }
}

ExperimentResult run_grid_experiment(const GridSpec& grid, const Scenario& sc,
                                     CalibrationMethod method, uint64_t master_seed) {
    grid.validate(sc);
    ExperimentResult result;
    CameraIntrinsics k_cal = sc.nominal;
    if (method != CalibrationMethod::none) {
        result.calibration =
            calibrate_end_to_end(method, sc, derive_seed(master_seed, kCalibrationStream));
        k_cal = result.calibration->corrected;
    }

    const CameraHeight height = sc.camera_height();
    const size_t total = grid.points.size() * static_cast<size_t>(grid.trials_per_point);
    result.records.assign(total, {});

    parallel_for(total, [&](size_t idx) {
        const int point_index = static_cast<int>(idx / grid.trials_per_point);
        const int trial_index = static_cast<int>(idx % grid.trials_per_point);
        const Pose2D truth = grid.points[point_index];
        const uint64_t trial_seed = derive_seed(master_seed, kTrialStream + idx);

        TrialRecord rec;
        rec.point_index = point_index;
        rec.trial_index = trial_index;
        rec.seed = trial_seed;
        rec.ground_truth = truth;
        try {
            const Frame frame = render_capture(sc, truth, trial_seed);
            Rng jitter(derive_seed(trial_seed, 2));
            LocateOptions opts;
            opts.roi = default_roi_params(sc.registry, sc.rs);
            opts.centroid_jitter_sigma_px = sc.noise.centroid_jitter_sigma;
            opts.jitter_rng = &jitter;
            const PositionFix fix = locate(frame, sc.registry, k_cal, height, sc.rs, opts);
            rec.estimated = fix.pose;
            rec.error_cm = std::hypot(fix.pose.x - truth.x, fix.pose.y - truth.y);
            rec.theta_error_rad = std::abs(normalize_angle(fix.pose.theta - truth.theta));
            rec.ok = true;
        } catch (const Error&) {
            rec.estimated = {std::nan(""), std::nan(""), std::nan("")};
            rec.error_cm = std::nan("");
            rec.theta_error_rad = std::nan("");
            rec.ok = false;
        }
        result.records[idx] = rec;
    });
    return result;
}

void require_failure_budget(const std::vector<TrialRecord>& records, double max_failure_fraction) {
    if (records.empty()) return;
    size_t failures = 0;
    for (const auto& r : records)
        if (!r.ok) ++failures;
    const double fraction = static_cast<double>(failures) / static_cast<double>(records.size());
    require(fraction <= max_failure_fraction, errc::experiment_failed,
            std::to_string(failures) + " of " + std::to_string(records.size()) +
                " trials failed (budget " + std::to_string(max_failure_fraction * 100) + "%)");
}

ErrorStats compute_stats(const std::vector<TrialRecord>& records) {
    std::vector<double> errors;
    size_t failures = 0;
    for (const auto& r : records) {
        if (r.ok)
            errors.push_back(r.error_cm);
        else
            ++failures;
    }
    require(!errors.empty(), errc::empty_input, "no successful trials to summarize");
    std::sort(errors.begin(), errors.end());

    ErrorStats stats;
    stats.samples = errors.size();
    stats.failures = failures;
    double sum = 0.0;
    for (double e : errors) sum += e;
    stats.mean_cm = sum / static_cast<double>(errors.size());
    stats.max_cm = errors.back();
    const size_t n = errors.size();
    const size_t idx90 = static_cast<size_t>(std::ceil(0.9 * static_cast<double>(n)));
    stats.p90_cm = errors[std::max<size_t>(idx90, 1) - 1];

    stats.cdf.reserve(n);
    for (size_t i = 0; i < n; ++i)
        stats.cdf.emplace_back(errors[i], static_cast<double>(i + 1) / static_cast<double>(n));

    const int bins =
        std::max(1, static_cast<int>(std::ceil(stats.max_cm / kHistogramBinWidthCm)));
    stats.histogram.resize(static_cast<size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        stats.histogram[b].lo = b * kHistogramBinWidthCm;
        stats.histogram[b].hi = (b + 1) * kHistogramBinWidthCm;
    }
    for (double e : errors) {
        int b = static_cast<int>(e / kHistogramBinWidthCm);
        b = std::clamp(b, 0, bins - 1);
        ++stats.histogram[static_cast<size_t>(b)].count;
    }
    return stats;
}

void write_results_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
    out << "point_index,trial_index,seed,gt_x,gt_y,gt_theta,est_x,est_y,est_theta,error_cm,status\n";
    for (const auto& r : records) {
        out << r.point_index << ',' << r.trial_index << ',' << r.seed << ','
            << fmt_double(r.ground_truth.x) << ',' << fmt_double(r.ground_truth.y) << ','
            << fmt_double(r.ground_truth.theta) << ',' << fmt_double(r.estimated.x) << ','
            << fmt_double(r.estimated.y) << ',' << fmt_double(r.estimated.theta) << ','
            << fmt_double(r.error_cm) << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
}

void write_stats_csv(const ErrorStats& stats, std::ostream& out) {
    out << "metric,value\n";
    out << "mean_cm," << fmt_double(stats.mean_cm) << '\n';
    out << "p90_cm," << fmt_double(stats.p90_cm) << '\n';
    out << "max_cm," << fmt_double(stats.max_cm) << '\n';
    out << "samples," << stats.samples << '\n';
    out << "failures," << stats.failures << '\n';
    out << "cdf\n";
    out << "error_cm,fraction\n";
    for (const auto& [e, f] : stats.cdf) out << fmt_double(e) << ',' << fmt_double(f) << '\n';
    out << "hist\n";
    out << "bin_lo_cm,bin_hi_cm,count\n";
    for (const auto& bin : stats.histogram)
        out << fmt_double(bin.lo) << ',' << fmt_double(bin.hi) << ',' << bin.count << '\n';
}

void write_samples_csv(const std::vector<Vec2>& samples, const std::string& unit_note,
                       std::ostream& out) {
    out << "# " << unit_note << '\n';
    out << "sample_index,x,y\n";
    for (size_t i = 0; i < samples.size(); ++i)
        out << i << ',' << fmt_double(samples[i].x) << ',' << fmt_double(samples[i].y) << '\n';
}

ReferenceStats reference_stats(CalibrationMethod method) {
    // Published grid-experiment figures; p90 for the dispersion method is
    // quoted as both 1.417 and 1.418 in the source, the per-experiment value
    // is kept here.
    switch (method) {
        case CalibrationMethod::rotation: return {1.54, 2.140, 2.64};
        case CalibrationMethod::dispersion: return {0.82, 1.418, 1.93};
        case CalibrationMethod::none: break;
    }
    fail(errc::validation, "no reference statistics for this method");
}

void parallel_for(size_t n, const std::function<void(size_t)>& f) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t workers = std::min<size_t>(hw, n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace vlp
