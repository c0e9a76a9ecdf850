#include "vlp/calibration.hpp"

namespace vlp {

Vec2 dispersion_center_mean(const std::vector<Vec2>& samples) {
    require(!samples.empty(), errc::empty_input, "no dispersion samples");
    Vec2 mean;
    for (const auto& s : samples) {
        mean.x += s.x;
        mean.y += s.y;
    }
    mean.x /= static_cast<double>(samples.size());
    mean.y /= static_cast<double>(samples.size());
    return mean;
}

PixelPoint apply_dispersion_correction(const PixelPoint& nominal, const Vec2& delta_cm,
                                       const CameraIntrinsics& k, const CameraHeight& height) {
    k.validate();
    require(height.cm > 0, errc::validation, "camera height must be positive");
    // A principal-point offset d shows up in origin fixes as
    // delta = -sigma * (H/f) * d, so the cancelling correction scales by
    // -sigma * f/H. World cm against f in mm and H in cm leaves mm.
    const double scale = -kImageInversionSign * k.focal_length / height.cm;
    const double dx_mm = scale * delta_cm.x;
    const double dy_mm = scale * delta_cm.y;
    return {nominal.i + dx_mm / k.du, nominal.j + dy_mm / k.dv};
}

DispersionResult dispersion_correct(const std::vector<Vec2>& samples_cm,
                                    const CameraIntrinsics& k, const CameraHeight& height,
                                    DispersionCenter method) {
    DispersionResult result;
    result.method = method;
    result.delta = method == DispersionCenter::mean
                       ? dispersion_center_mean(samples_cm)
                       : smallest_enclosing_circle(samples_cm).center;
    result.corrected_point =
        apply_dispersion_correction(k.principal_point, result.delta, k, height);
    return result;
}

PixelPoint rotation_calibrate(const std::vector<Vec2>& image_samples_mm,
                              const CameraIntrinsics& k) {
    require(image_samples_mm.size() >= 3, errc::insufficient_samples,
            "rotation calibration needs at least 3 recorded positions");
    const Circle fit = fit_circle_kasa(image_samples_mm);
    return {k.principal_point.i + fit.center.x / k.du,
            k.principal_point.j + fit.center.y / k.dv};
}

}  // namespace vlp
