#pragma once

#include <vector>

#include "vlp/scene.hpp"
#include "vlp/vision.hpp"

namespace vlp {

// Per-row mean intensity of a lamp ROI, top to bottom.
struct StripeProfile {
    std::vector<double> values;
};

struct PeriodEstimate {
    double period_rows = 0.0;
    double confidence = 0.0;  // normalized autocorrelation peak height
};

struct DecodedLed {
    int id = 0;
    WorldPoint world;
    PixelPoint pixel_centroid;  // refined disc centre
    ImagePoint image_centroid;
    PeriodEstimate period;
};

struct DecodeParams {
    double profile_width_fraction = 0.6;  // central columns used for the row profile
    double min_confidence = 0.4;          // below this the profile is aperiodic
    double period_ratio_tolerance = 1.12; // max measured/expected ratio for a match
    double ambiguity_margin = 0.01;       // two ids this close in log distance tie
};

// Full bright/dark cycle of a fixture's stripes, in rows.
double expected_period_rows(const LedFixture& fixture, const RollingShutterConfig& rs);
double max_expected_period_rows(const LedRegistry& registry, const RollingShutterConfig& rs);

// Row profile over the central columns of the ROI. Throws roi_too_small when
// the window is shorter than twice the longest expected period.
StripeProfile column_profile(const Frame& frame, const RoiWindow& roi, double max_period_rows,
                             double width_fraction = 0.6);

// Fundamental stripe period from the mean-removed autocorrelation: the
// dominant positive peak, refined by parabolic interpolation. Throws
// no_periodicity when the peak is weaker than min_confidence.
PeriodEstimate estimate_stripe_period(const StripeProfile& profile, double min_confidence = 0.4);

// Nearest fixture in log-period space. Throws ambiguous_id when the two best
// candidates are within ambiguity_margin of each other and unknown_id when no
// candidate is within the ratio tolerance.
int classify_id(const PeriodEstimate& est, const LedRegistry& registry,
                const RollingShutterConfig& rs, const DecodeParams& params = {});

WorldPoint lookup_world(int id, const LedRegistry& registry);

// Disc centre from a circle fit to the per-row spans of bright pixels. The
// row spans are full chords regardless of stripe phase, so the fitted centre
// does not carry the stripe-phase bias of an intensity centroid. Falls back
// to the ROI centroid when the fit is degenerate.
PixelPoint refine_disc_center(const Frame& frame, const RoiWindow& roi, int threshold);

// ROI -> identified beacon with refined centroid.
DecodedLed decode_roi(const Frame& frame, const RoiWindow& roi, int threshold,
                      const LedRegistry& registry, const RollingShutterConfig& rs,
                      const CameraIntrinsics& k, const DecodeParams& params = {});

}  // namespace vlp
