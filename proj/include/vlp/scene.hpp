#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlp/geometry.hpp"

namespace vlp {

// One ceiling beacon: identity, placement, luminous disc and OOK frequency.
struct LedFixture {
    int id = 0;
    WorldPoint position;           // cm
    double radius_cm = 0.0;        // luminous disc radius
    double mod_frequency_hz = 0.0; // OOK square-wave frequency
    double half_power_angle_deg = 60.0;
};

// Fixtures keyed by id. Immutable after load.
class LedRegistry {
public:
    LedRegistry() = default;
    explicit LedRegistry(std::vector<LedFixture> fixtures);

    const std::vector<LedFixture>& fixtures() const { return fixtures_; }
    const LedFixture& by_id(int id) const;  // throws unknown_id
    bool has_id(int id) const;
    size_t size() const { return fixtures_.size(); }
    bool empty() const { return fixtures_.empty(); }

    // Common beacon height; all fixtures share it by construction.
    double plane_z_cm() const;

    // Ratio between every frequency pair must be >= this for the period
    // classifier to separate ids.
    static constexpr double kMinFrequencyRatio = 1.25;

private:
    void validate() const;
    std::vector<LedFixture> fixtures_;
};

// Plain-text registry: one `id x_cm y_cm z_cm radius_cm freq_hz half_power_deg`
// line per fixture, `#` comments.
LedRegistry load_registry(const std::string& path);
LedRegistry parse_registry(const std::string& text, const std::string& origin = "<registry>");

struct RollingShutterConfig {
    double exposure_ms = 0.02;      // short enough that a row is fully on or off
    double row_readout_us = 25.0;   // time between consecutive row starts
    double frame_start_time_s = 0.0;

    double row_readout_s() const { return row_readout_us * 1e-6; }
    void validate() const;
};

struct NoiseModel {
    double gaussian_sigma = 0.0;        // gray levels, per pixel
    double centroid_jitter_sigma = 0.0; // px, applied to decoded centroids in evaluation
    double background_level = 20.0;     // gray levels
    double amplitude = 200.0;           // disc brightness above background, before falloff
    uint64_t seed = 0;

    void validate() const;
};

struct Frame {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major, 8-bit grayscale

    // Capture metadata (simulator only).
    double frame_start_time_s = 0.0;
    std::optional<Pose2D> ground_truth;
    uint64_t seed = 0;

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// Square wave with 50% duty, phase 0 at t = 0: ON iff floor(2 f t) is even.
bool led_waveform(const LedFixture& fixture, double t_s);

// Lambertian order m = -ln 2 / ln cos(psi_half); m = 1 at 60 degrees.
double lambertian_order(double half_power_angle_deg);

struct DiscProjection {
    PixelPoint center;
    double radius_px = 0.0;
};

// Projected disc centre and radius; radius_px = f * radius / (H * dl).
DiscProjection disc_projection(const LedFixture& fixture, const Pose2D& camera,
                               const CameraIntrinsics& k, const CameraHeight& height);

// Renders one rolling-shutter frame. Row r is sampled at
// frame_start_time + r * row_readout; a pixel inside a projected disc reads
// background + amplitude * cos^m(phi) when that fixture is ON at the row's
// sample time, background otherwise. Gaussian noise is then added and the
// result clamped to [0, 255]. Byte-identical output for identical inputs.
// An empty or out-of-view registry yields a plain background frame.
Frame render_frame(const LedRegistry& registry, const Pose2D& camera,
                   const CameraIntrinsics& k, const RollingShutterConfig& rs,
                   const NoiseModel& noise, const CameraHeight& height);

// Binary PGM ("P5", maxval 255).
void write_pgm(const Frame& frame, const std::string& path);
Frame read_pgm(const std::string& path);
std::string pgm_bytes(const Frame& frame);

}  // namespace vlp
