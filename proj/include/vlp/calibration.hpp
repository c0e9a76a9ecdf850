#pragma once

#include <vector>

#include "vlp/circle.hpp"
#include "vlp/geometry.hpp"

namespace vlp {

enum class DispersionCenter { mean, min_circle };

struct DispersionResult {
    Vec2 delta;                 // (dx, dy), cm, deviation of the fixes from the true position
    PixelPoint corrected_point; // principal point after correction
    DispersionCenter method = DispersionCenter::mean;
};

// Centre of the dispersion circle as the arithmetic mean of repeated fixes
// taken at the world origin. Throws empty_input.
Vec2 dispersion_center_mean(const std::vector<Vec2>& samples);

// Full dispersion correction from origin fixes: picks the circle centre by
// `method` (the mean is the default corrector; the enclosing-circle centre is
// the alternative reading) and maps it back onto the principal point.
DispersionResult dispersion_correct(const std::vector<Vec2>& samples_cm,
                                    const CameraIntrinsics& k, const CameraHeight& height,
                                    DispersionCenter method = DispersionCenter::mean);

// Principal point shifted so the systematic world-frame deviation `delta_cm`
// vanishes: the deviation converts back to sensor millimetres through the
// similar-triangles scale f/H (with the image-inversion sign folded in) and
// then to pixels through du/dv.
PixelPoint apply_dispersion_correction(const PixelPoint& nominal, const Vec2& delta_cm,
                                       const CameraIntrinsics& k, const CameraHeight& height);

// Rotation method: least-squares circle fit (Kasa) to LED image positions
// recorded while the camera spins about its optical axis. The samples are
// image coordinates (mm) measured with k's current principal point; the
// fitted centre, in pixels, is the corrected principal point.
PixelPoint rotation_calibrate(const std::vector<Vec2>& image_samples_mm,
                              const CameraIntrinsics& k);

}  // namespace vlp
