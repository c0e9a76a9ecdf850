#include "vlp/decode.hpp"

#include <algorithm>
#include <cmath>

#include "vlp/circle.hpp"

namespace vlp {

double expected_period_rows(const LedFixture& fixture, const RollingShutterConfig& rs) {
    return 1.0 / (fixture.mod_frequency_hz * rs.row_readout_s());
}

double max_expected_period_rows(const LedRegistry& registry, const RollingShutterConfig& rs) {
    double best = 0.0;
    for (const auto& f : registry.fixtures()) best = std::max(best, expected_period_rows(f, rs));
    return best;
}

StripeProfile column_profile(const Frame& frame, const RoiWindow& roi, double max_period_rows,
                             double width_fraction) {
    require(roi.x >= 0 && roi.y >= 0 && roi.x + roi.w <= frame.width &&
                roi.y + roi.h <= frame.height,
            errc::validation, "roi must lie within the frame");
    require(roi.h >= 2.0 * max_period_rows, errc::roi_too_small,
            "roi height " + std::to_string(roi.h) + " is shorter than two stripe periods");

    const double margin = (1.0 - width_fraction) / 2.0;
    int x0 = roi.x + static_cast<int>(std::floor(roi.w * margin));
    int x1 = roi.x + static_cast<int>(std::ceil(roi.w * (1.0 - margin)));
    x1 = std::max(x1, x0 + 1);

    StripeProfile profile;
    profile.values.reserve(static_cast<size_t>(roi.h));
    for (int y = roi.y; y < roi.y + roi.h; ++y) {
        double sum = 0.0;
        for (int x = x0; x < x1; ++x) sum += frame.at(x, y);
        profile.values.push_back(sum / (x1 - x0));
    }
    return profile;
}

PeriodEstimate estimate_stripe_period(const StripeProfile& profile, double min_confidence) {
    const auto n = static_cast<int>(profile.values.size());
    require(n >= 8, errc::roi_too_small, "profile too short for period estimation");

    double mean = 0.0;
    for (double v : profile.values) mean += v;
    mean /= n;
    std::vector<double> x(profile.values);
    for (double& v : x) v -= mean;

    const int max_lag = n / 2;
    std::vector<double> rho(static_cast<size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (int i = 0; i + k < n; ++i) s += x[i] * x[i + k];
        rho[k] = s / n;  // biased estimate: later repeats decay, the first peak wins
    }
    require(rho[0] > 1e-12, errc::no_periodicity, "profile has no intensity variation");
    for (int k = 1; k <= max_lag; ++k) rho[k] /= rho[0];
    rho[0] = 1.0;

    // Only local maxima count: the autocorrelation decays from lag 0, so the
    // raw global maximum can sit on that initial slope instead of on a peak.
    int peak = 0;
    for (int k = 2; k <= max_lag; ++k) {
        const double next = k < max_lag ? rho[k + 1] : -1.0;
        if (rho[k] <= 0.0 || rho[k] <= rho[k - 1] || rho[k] < next) continue;
        if (peak == 0 || rho[k] > rho[peak]) peak = k;
    }
    require(peak != 0, errc::no_periodicity, "no positive autocorrelation peak");

    double refined = peak;
    if (peak > 2 && peak < max_lag) {
        const double y1 = rho[peak - 1], y2 = rho[peak], y3 = rho[peak + 1];
        const double denom = y1 - 2.0 * y2 + y3;
        if (std::abs(denom) > 1e-12) {
            const double delta = 0.5 * (y1 - y3) / denom;
            if (std::abs(delta) <= 1.0) refined = peak + delta;
        }
    }

    PeriodEstimate est;
    est.period_rows = std::max(2.0, refined);
    est.confidence = std::clamp(rho[peak] / (1.0 - static_cast<double>(peak) / n), 0.0, 1.0);
    require(est.confidence >= min_confidence, errc::no_periodicity,
            "autocorrelation peak too weak (confidence " + std::to_string(est.confidence) + ")");
    return est;
}

int classify_id(const PeriodEstimate& est, const LedRegistry& registry,
                const RollingShutterConfig& rs, const DecodeParams& params) {
    require(!registry.empty(), errc::empty_input, "registry is empty");

    int best_id = 0, second_id = 0;
    double best = 0.0, second = 0.0;
    bool have_best = false, have_second = false;
    for (const auto& f : registry.fixtures()) {
        const double d = std::abs(std::log(est.period_rows / expected_period_rows(f, rs)));
        if (!have_best || d < best) {
            second = best;
            second_id = best_id;
            have_second = have_best;
            best = d;
            best_id = f.id;
            have_best = true;
        } else if (!have_second || d < second) {
            second = d;
            second_id = f.id;
            have_second = true;
        }
    }
    if (have_second && second - best <= params.ambiguity_margin * std::max(second, 1e-300))
        fail(errc::ambiguous_id, "period " + std::to_string(est.period_rows) +
                                     " rows is equidistant from ids " + std::to_string(best_id) +
                                     " and " + std::to_string(second_id));
    require(best <= std::log(params.period_ratio_tolerance), errc::unknown_id,
            "period " + std::to_string(est.period_rows) + " rows matches no registered fixture");
    return best_id;
}

WorldPoint lookup_world(int id, const LedRegistry& registry) { return registry.by_id(id).position; }

PixelPoint refine_disc_center(const Frame& frame, const RoiWindow& roi, int threshold) {
    std::vector<Vec2> edges;
    int rows_with_runs = 0;
    for (int y = roi.y; y < roi.y + roi.h; ++y) {
        // Longest bright run in the row; its ends sit on the disc rim.
        int best_start = -1, best_len = 0, run_start = -1;
        for (int x = roi.x; x <= roi.x + roi.w; ++x) {
            const bool bright = x < roi.x + roi.w && frame.at(x, y) > threshold;
            if (bright && run_start < 0) run_start = x;
            if (!bright && run_start >= 0) {
                if (x - run_start > best_len) {
                    best_len = x - run_start;
                    best_start = run_start;
                }
                run_start = -1;
            }
        }
        if (best_len < 2) continue;
        ++rows_with_runs;
        const double yc = y + 0.5;
        edges.push_back({static_cast<double>(best_start), yc});
        edges.push_back({static_cast<double>(best_start + best_len), yc});
    }
    if (rows_with_runs >= 3 && edges.size() >= 6) {
        try {
            const Circle c = fit_circle_kasa(edges);
            if (c.radius > 0 &&
                roi.contains({c.center.x, c.center.y}))
                return {c.center.x, c.center.y};
        } catch (const Error&) {
            // fall through to the plain centroid
        }
    }
    return roi.centroid;
}

DecodedLed decode_roi(const Frame& frame, const RoiWindow& roi, int threshold,
                      const LedRegistry& registry, const RollingShutterConfig& rs,
                      const CameraIntrinsics& k, const DecodeParams& params) {
    const double max_period = max_expected_period_rows(registry, rs);
    const StripeProfile profile =
        column_profile(frame, roi, max_period, params.profile_width_fraction);
    DecodedLed led;
    led.period = estimate_stripe_period(profile, params.min_confidence);
    led.id = classify_id(led.period, registry, rs, params);
    led.world = lookup_world(led.id, registry);
    led.pixel_centroid = refine_disc_center(frame, roi, threshold);
    led.image_centroid = pixel_to_image(led.pixel_centroid, k);
    return led;
}

}  // namespace vlp
