#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "vlp/decode.hpp"

using namespace vlp;

namespace {

// Hand-built frame of alternating bright/dark row bands.
Frame striped_frame(int w, int h, int half_period, uint8_t lo, uint8_t hi, int phase = 0) {
    Frame f;
    f.width = w;
    f.height = h;
    f.pixels.resize(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const bool bright = (((y + phase) / half_period) % 2) == 0;
        for (int x = 0; x < w; ++x) f.pixels[static_cast<size_t>(y) * w + x] = bright ? hi : lo;
    }
    return f;
}

StripeProfile square_profile(int length, double period, double lo = 0.0, double hi = 1.0) {
    StripeProfile p;
    for (int i = 0; i < length; ++i) {
        const double phase = std::fmod(i, period);
        p.values.push_back(phase < period / 2 ? hi : lo);
    }
    return p;
}

// Registry whose expected stripe cycles at 25 us/row are 20, 40 and 10 rows.
LedRegistry period_registry() {
    return LedRegistry({
        {1, {13.0, 159.0, 285.0}, 16.0, 2000.0, 60.0},
        {2, {159.0, 159.0, 285.0}, 16.0, 1000.0, 60.0},
        {3, {159.0, 13.0, 285.0}, 16.0, 4000.0, 60.0},
    });
}

}  // namespace

TEST_SUITE("decode") {

TEST_CASE("column_profile of alternating bands is a square wave of the band period") {
    const Frame f = striped_frame(40, 120, 10, 10, 200);
    RoiWindow roi{0, 0, 40, 120, {20, 60}, 40 * 120};
    const StripeProfile profile = column_profile(f, roi, 20.0);
    REQUIRE(profile.values.size() == 120);
    for (int y = 0; y < 120; ++y)
        CHECK(profile.values[y] == doctest::Approx(((y / 10) % 2) == 0 ? 200.0 : 10.0));
    const PeriodEstimate est = estimate_stripe_period(profile);
    CHECK(est.period_rows == doctest::Approx(20.0).epsilon(0.025));
}

TEST_CASE("column_profile of a uniform roi is constant and aperiodic") {
    Frame f = striped_frame(40, 120, 10, 120, 120);
    RoiWindow roi{0, 0, 40, 120, {20, 60}, 40 * 120};
    const StripeProfile profile = column_profile(f, roi, 20.0);
    for (double v : profile.values) CHECK(v == doctest::Approx(120.0));
    try {
        estimate_stripe_period(profile);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::no_periodicity);
    }
}

TEST_CASE("column_profile refuses a window shorter than two periods") {
    const Frame f = striped_frame(40, 30, 10, 10, 200);
    RoiWindow roi{0, 0, 40, 30, {20, 15}, 40 * 30};
    try {
        column_profile(f, roi, 20.0);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::roi_too_small);
    }
}

TEST_CASE("estimate_stripe_period nails clean square waves") {
    CHECK(estimate_stripe_period(square_profile(100, 20)).period_rows ==
          doctest::Approx(20.0).epsilon(0.025));
    CHECK(estimate_stripe_period(square_profile(100, 40)).period_rows ==
          doctest::Approx(40.0).epsilon(0.0125));
}

TEST_CASE("estimate_stripe_period stays within half a row across periods 4..64") {
    for (int period = 4; period <= 64; ++period) {
        const int length = std::max(100, 3 * period);
        const PeriodEstimate est = estimate_stripe_period(square_profile(length, period));
        CHECK(std::abs(est.period_rows - period) <= 0.5);
        CHECK(est.confidence > 0.6);
    }
}

TEST_CASE("estimate_stripe_period rejects noise-only profiles") {
    Rng rng(8);
    StripeProfile noise;
    for (int i = 0; i < 120; ++i) noise.values.push_back(rng.next_gaussian());
    CHECK_THROWS_AS(estimate_stripe_period(noise), Error);
}

TEST_CASE("rendered stripe profile has the timing-model period") {
    Scenario sc = test::single_lamp_scenario(2000.0);  // 20-row cycle
    const Pose2D pose{86, 86, 0};
    const Frame frame =
        render_frame(sc.registry, pose, sc.nominal, sc.rs, sc.noise, sc.camera_height());
    const OtsuResult otsu = otsu_threshold(histogram(frame));
    const auto rois = extract_rois(frame, otsu.threshold, default_roi_params(sc.registry, sc.rs));
    REQUIRE(rois.size() == 1);
    const StripeProfile profile =
        column_profile(frame, rois.front(), expected_period_rows(sc.registry.fixtures()[0], sc.rs));
    const PeriodEstimate est = estimate_stripe_period(profile);
    CHECK(est.period_rows == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("classify_id picks the nearest fixture in log-period space") {
    const LedRegistry reg = period_registry();
    const RollingShutterConfig rs{0.02, 25.0, 0.0};
    CHECK(classify_id({20.3, 1.0}, reg, rs) == 1);
    CHECK(classify_id({38.0, 1.0}, reg, rs) == 2);
    CHECK(classify_id({10.8, 1.0}, reg, rs) == 3);
}

TEST_CASE("classify_id flags the log-midpoint as ambiguous") {
    const LedRegistry reg = period_registry();
    const RollingShutterConfig rs{0.02, 25.0, 0.0};
    try {
        classify_id({std::sqrt(20.0 * 40.0), 1.0}, reg, rs);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::ambiguous_id);
    }
}

TEST_CASE("classify_id rejects periods outside the tolerance") {
    const LedRegistry reg = period_registry();
    const RollingShutterConfig rs{0.02, 25.0, 0.0};
    try {
        classify_id({80.0, 1.0}, reg, rs);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_id);
    }
}

TEST_CASE("classification is invariant under a common period scale") {
    const RollingShutterConfig rs{0.02, 25.0, 0.0};
    const LedRegistry reg = period_registry();
    // Halving every frequency doubles every expected period; doubling the
    // measurement must keep the label.
    std::vector<LedFixture> slowed = reg.fixtures();
    for (auto& f : slowed) f.mod_frequency_hz /= 2.0;
    const LedRegistry reg2(std::move(slowed));
    Rng rng(55);
    for (int i = 0; i < 200; ++i) {
        const double measured = rng.uniform(9.0, 42.0);
        int a = 0, b = 0;
        try {
            a = classify_id({measured, 1.0}, reg, rs);
        } catch (const Error&) {
            a = -1;
        }
        try {
            b = classify_id({2.0 * measured, 1.0}, reg2, rs);
        } catch (const Error&) {
            b = -1;
        }
        CHECK(a == b);
    }
}

TEST_CASE("lookup_world returns the registered coordinates") {
    const LedRegistry reg = test::platform_registry();
    const WorldPoint w1 = lookup_world(1, reg);
    CHECK(w1.x == doctest::Approx(13.0));
    CHECK(w1.y == doctest::Approx(159.0));
    CHECK(w1.z == doctest::Approx(285.0));
    const WorldPoint w3 = lookup_world(3, reg);
    CHECK(w3.x == doctest::Approx(159.0));
    CHECK(w3.y == doctest::Approx(13.0));
    try {
        lookup_world(99, reg);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_id);
    }
}

TEST_CASE("every lamp decodes to its own id on a zero-noise pose grid") {
    const Scenario sc = test::zero_noise_scenario();
    const CameraHeight h = sc.camera_height();
    int checked = 0;
    for (int gx = 0; gx < 4; ++gx) {
        for (int gy = 0; gy < 4; ++gy) {
            const Pose2D pose{26.0 + gx * 40.0, 26.0 + gy * 40.0, 0.35 * (gx + gy)};
            const Frame frame = render_capture(sc, pose, 900 + gx * 7 + gy);
            const OtsuResult otsu = otsu_threshold(histogram(frame));
            const auto rois =
                extract_rois(frame, otsu.threshold, default_roi_params(sc.registry, sc.rs));
            REQUIRE(rois.size() == 3);
            for (const auto& roi : rois) {
                const DecodedLed led =
                    decode_roi(frame, roi, otsu.threshold, sc.registry, sc.rs, sc.nominal);
                const DiscProjection d =
                    disc_projection(sc.registry.by_id(led.id), pose, sc.nominal, h);
                CHECK(roi.contains(d.center));
                ++checked;
            }
        }
    }
    CHECK(checked == 48);
}

TEST_CASE("period estimation survives heavy pixel noise") {
    Scenario sc = test::single_lamp_scenario(2000.0);
    sc.noise.gaussian_sigma = 10.0;
    const Pose2D pose{86, 86, 0};
    int good = 0, trials = 1000;
    std::vector<int> results(static_cast<size_t>(trials), 0);
    parallel_for(results.size(), [&](size_t t) {
        const Frame frame = render_capture(sc, pose, 5000 + t);
        try {
            const OtsuResult otsu = otsu_threshold(histogram(frame));
            const auto rois =
                extract_rois(frame, otsu.threshold, default_roi_params(sc.registry, sc.rs));
            if (rois.size() != 1) return;
            const StripeProfile profile = column_profile(
                frame, rois.front(), expected_period_rows(sc.registry.fixtures()[0], sc.rs));
            const PeriodEstimate est = estimate_stripe_period(profile);
            if (std::abs(est.period_rows - 20.0) <= 1.0) results[t] = 1;
        } catch (const Error&) {
        }
    });
    for (int r : results) good += r;
    CHECK(good >= 990);  // >= 99%
}

}  // TEST_SUITE
