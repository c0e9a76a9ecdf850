#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "vlp/pipeline.hpp"

namespace vlp {

// Plain-text configuration: `[section]` headers and `key = value` lines,
// `#` comments. Unknown sections or keys are rejected with line/column
// diagnostics; invariants are checked after parsing.
struct Config {
    // [camera]
    int width = 2048;
    int height = 1536;
    double pixel_pitch_mm = 0.005;
    double focal_length_mm = 4.0;
    double camera_z_cm = 0.0;

    // [platform]
    double platform_x0_cm = 13.0;
    double platform_y0_cm = 13.0;
    double platform_w_cm = 146.0;
    double platform_l_cm = 146.0;

    // [rolling_shutter]
    double exposure_ms = 0.02;
    double row_readout_us = 25.0;

    // [noise]
    double gaussian_sigma = 6.0;
    double centroid_jitter_sigma = 1.0;
    double background_level = 20.0;
    double amplitude = 200.0;

    // [grid]
    int grid_nx = 6;
    int grid_ny = 6;
    int trials_per_point = 12;
    double grid_margin_cm = 13.0;
    ThetaMode theta_mode = ThetaMode::uniform;
    double theta_fixed_rad = 0.0;

    // [calibration]
    double offset_i_px = 0.0;  // injected principal-point offset (simulation truth)
    double offset_j_px = 0.0;
    int dispersion_samples = 432;
    int rotation_steps = 12;
    int rotation_target_id = 0;
    double rotation_x_cm = 86.0;
    double rotation_y_cm = 86.0;

    // top level
    std::string registry_path;
    uint64_t master_seed = 1;

    LedRegistry registry;  // loaded from registry_path at parse time

    CameraIntrinsics intrinsics() const;
    Scenario scenario() const;
    GridSpec grid(uint64_t seed) const;
    void validate() const;
};

Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& origin,
                         const std::string& base_dir);

// Canonical form; parse(write(c)) preserves every value.
void write_config(const Config& config, std::ostream& out);

// Small corrected-intrinsics artifact emitted by `calibrate` and consumed by
// `locate --intrinsics`.
void write_corrected_intrinsics(const PixelPoint& principal_point, const std::string& method,
                                std::ostream& out);
PixelPoint read_corrected_intrinsics(const std::string& path);

}  // namespace vlp
