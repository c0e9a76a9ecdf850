#include "vlp/geometry.hpp"

#include <cmath>

namespace vlp {

CameraIntrinsics CameraIntrinsics::nominal(int width, int height, double pixel_pitch_mm,
                                           double focal_length_mm) {
    CameraIntrinsics k;
    k.width = width;
    k.height = height;
    k.du = k.dv = k.dl = pixel_pitch_mm;
    k.principal_point = {width / 2.0, height / 2.0};
    k.focal_length = focal_length_mm;
    return k;
}

void CameraIntrinsics::validate() const {
    require(width > 0 && height > 0, errc::validation, "image dimensions must be positive");
    require(du > 0 && dv > 0 && dl > 0, errc::validation, "pixel pitch must be positive");
    require(focal_length > 0, errc::validation, "focal length must be positive");
}

double normalize_angle(double theta) {
    theta = std::remainder(theta, 2.0 * M_PI);
    if (theta <= -M_PI) theta += 2.0 * M_PI;
    return theta;
}

ImagePoint pixel_to_image(const PixelPoint& p, const CameraIntrinsics& k) {
    return {(p.i - k.principal_point.i) * k.du, (p.j - k.principal_point.j) * k.dv};
}

PixelPoint image_to_pixel(const ImagePoint& q, const CameraIntrinsics& k) {
    return {q.u / k.du + k.principal_point.i, q.v / k.dv + k.principal_point.j};
}

double estimate_azimuth(const ImagePoint& c1, const ImagePoint& c2, double min_separation_mm) {
    const double du = c1.u - c2.u;
    const double dv = c1.v - c2.v;
    require(std::hypot(du, dv) >= min_separation_mm, errc::coincident_centroids,
            "beacon centroids are too close to define a direction");
    return normalize_angle(std::atan2(dv, du));
}

WorldPoint rotate_to_world(const WorldPoint& p_cam, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {p_cam.x * c - p_cam.y * s, p_cam.x * s + p_cam.y * c, p_cam.z};
}

PixelPoint project_led(const WorldPoint& led, const Pose2D& camera,
                       const CameraIntrinsics& k, const CameraHeight& height) {
    require(height.cm > 0, errc::behind_camera, "LED plane is not above the camera");
    const double dx = led.x - camera.x;
    const double dy = led.y - camera.y;
    // World offset expressed in the camera frame (yaw removed).
    const double c = std::cos(-camera.theta);
    const double s = std::sin(-camera.theta);
    const double cx = dx * c - dy * s;
    const double cy = dx * s + dy * c;
    // Similar triangles with the H/f scale made explicit; cm -> mm.
    const double scale = kImageInversionSign * k.focal_length / (height.cm * 10.0);
    const ImagePoint q{scale * cx * 10.0, scale * cy * 10.0};
    return image_to_pixel(q, k);
}

Pose2D position_from_two_leds(const LedAnchor& anchor1, const LedAnchor& anchor2,
                              const ImagePoint& c1, const ImagePoint& c2,
                              const CameraIntrinsics& k, const CameraHeight& height,
                              double min_separation_mm, double height_tolerance_cm) {
    require(anchor1.id < anchor2.id, errc::validation, "beacon pair must be ordered by id");
    require(std::abs(anchor1.world.z - anchor2.world.z) <= height_tolerance_cm,
            errc::height_mismatch, "paired beacons must share a common height");
    require(height.cm > 0, errc::behind_camera, "LED plane is not above the camera");

    const double theta_img = estimate_azimuth(c1, c2, min_separation_mm);
    // The image-plane angle equals the pair's world direction rotated by the
    // camera yaw and flipped by the lens inversion; undo both.
    const double phi = std::atan2(anchor1.world.y - anchor2.world.y,
                                  anchor1.world.x - anchor2.world.x);
    const double flip = kImageInversionSign < 0 ? M_PI : 0.0;
    const double theta = normalize_angle(phi + flip - theta_img);

    // Camera-frame offset of the beacon midpoint, similar triangles, mm -> cm.
    const double scale = kImageInversionSign * (height.cm * 10.0) / k.focal_length;
    const double off_x = scale * 0.5 * (c1.u + c2.u) / 10.0;
    const double off_y = scale * 0.5 * (c1.v + c2.v) / 10.0;

    const WorldPoint off_world = rotate_to_world({off_x, off_y, 0.0}, theta);
    const double mid_x = 0.5 * (anchor1.world.x + anchor2.world.x);
    const double mid_y = 0.5 * (anchor1.world.y + anchor2.world.y);
    return {mid_x - off_world.x, mid_y - off_world.y, theta};
}

}  // namespace vlp
