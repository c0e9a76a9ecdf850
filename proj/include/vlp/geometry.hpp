#pragma once

#include <cmath>

#include "vlp/error.hpp"

namespace vlp {

// World-frame point, centimetres.
struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Pixel coordinates, origin at the image corner. Sub-pixel values allowed.
struct PixelPoint {
    double i = 0.0;
    double j = 0.0;
};

// Sensor-plane coordinates in millimetres, origin at the principal point.
struct ImagePoint {
    double u = 0.0;
    double v = 0.0;
};

// Planar pose: position in centimetres plus azimuth about the vertical axis,
// normalized to (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

// Vertical distance from the lens centre to the LED plane, centimetres.
struct CameraHeight {
    double cm = 0.0;
};

struct CameraIntrinsics {
    int width = 0;
    int height = 0;
    double du = 0.0;            // mm per pixel along i
    double dv = 0.0;            // mm per pixel along j
    double dl = 0.0;            // isotropic mm-per-pixel scale (du = dv = dl by default)
    PixelPoint principal_point; // nominal = image centre until calibrated
    double focal_length = 0.0;  // mm

    static CameraIntrinsics nominal(int width, int height, double pixel_pitch_mm,
                                    double focal_length_mm);

    void validate() const;
};

// The lens inverts the image: a +x world offset maps to -u on the sensor.
// The projector and the solver share this constant so they stay exact
// mutual inverses.
inline constexpr double kImageInversionSign = -1.0;

// Minimum centroid separation used by estimate_azimuth, in mm
// (one pixel at the default 0.005 mm pitch).
inline constexpr double kDefaultMinSeparationMm = 0.005;

double normalize_angle(double theta);

ImagePoint pixel_to_image(const PixelPoint& p, const CameraIntrinsics& k);
PixelPoint image_to_pixel(const ImagePoint& q, const CameraIntrinsics& k);

// Angle of the vector c1 - c2 on the sensor plane, normalized to (-pi, pi].
// Throws coincident_centroids when the points are closer than min_separation_mm.
double estimate_azimuth(const ImagePoint& c1, const ImagePoint& c2,
                        double min_separation_mm = kDefaultMinSeparationMm);

// Z-rotation by theta: (x cos - y sin, x sin + y cos, z).
WorldPoint rotate_to_world(const WorldPoint& p_cam, double theta);

// Forward pinhole model for a ceiling-mounted point at world position `led`
// seen by a vertically mounted camera at `camera`. Serves as the oracle for
// the two-beacon solver. Throws behind_camera when height.cm <= 0.
PixelPoint project_led(const WorldPoint& led, const Pose2D& camera,
                       const CameraIntrinsics& k, const CameraHeight& height);

struct LedAnchor {
    int id = 0;
    WorldPoint world;
};

// Recovers the camera pose from two decoded beacons and their image
// centroids. anchor1.id < anchor2.id and c1/c2 must be matched by decoded ID.
// Exact inverse of project_led for both beacons.
Pose2D position_from_two_leds(const LedAnchor& anchor1, const LedAnchor& anchor2,
                              const ImagePoint& c1, const ImagePoint& c2,
                              const CameraIntrinsics& k, const CameraHeight& height,
                              double min_separation_mm = kDefaultMinSeparationMm,
                              double height_tolerance_cm = 0.1);

}  // namespace vlp
