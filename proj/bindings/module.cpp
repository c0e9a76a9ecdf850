#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vlp/circle.hpp"
#include "vlp/config.hpp"
#include "vlp/pipeline.hpp"

namespace py = pybind11;

namespace {

vlp::Frame frame_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw py::value_error("frame array must be 2-D (height, width)");
    vlp::Frame frame;
    frame.height = static_cast<int>(a.shape(0));
    frame.width = static_cast<int>(a.shape(1));
    frame.pixels.assign(a.data(), a.data() + a.size());
    return frame;
}

py::array_t<uint8_t> array_from_frame(const vlp::Frame& frame) {
    py::array_t<uint8_t> a({frame.height, frame.width});
    std::copy(frame.pixels.begin(), frame.pixels.end(), a.mutable_data());
    return a;
}

std::vector<vlp::Vec2> vec2_list(const std::vector<std::pair<double, double>>& pts) {
    std::vector<vlp::Vec2> out;
    out.reserve(pts.size());
    for (const auto& [x, y] : pts) out.push_back({x, y});
    return out;
}

}  // namespace

PYBIND11_MODULE(_vlpsim, m) {
    m.doc() = "Visible-light positioning: rolling-shutter beacon simulator, decoder and solver";

    py::register_exception<vlp::Error>(m, "VlpError");

    py::class_<vlp::WorldPoint>(m, "WorldPoint")
        .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
             py::arg("z") = 0.0)
        .def_readwrite("x", &vlp::WorldPoint::x)
        .def_readwrite("y", &vlp::WorldPoint::y)
        .def_readwrite("z", &vlp::WorldPoint::z);

    py::class_<vlp::PixelPoint>(m, "PixelPoint")
        .def(py::init<double, double>(), py::arg("i") = 0.0, py::arg("j") = 0.0)
        .def_readwrite("i", &vlp::PixelPoint::i)
        .def_readwrite("j", &vlp::PixelPoint::j);

    py::class_<vlp::ImagePoint>(m, "ImagePoint")
        .def(py::init<double, double>(), py::arg("u") = 0.0, py::arg("v") = 0.0)
        .def_readwrite("u", &vlp::ImagePoint::u)
        .def_readwrite("v", &vlp::ImagePoint::v);

    py::class_<vlp::Pose2D>(m, "Pose2D")
        .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0,
             py::arg("theta") = 0.0)
        .def_readwrite("x", &vlp::Pose2D::x)
        .def_readwrite("y", &vlp::Pose2D::y)
        .def_readwrite("theta", &vlp::Pose2D::theta);

    py::class_<vlp::CameraHeight>(m, "CameraHeight")
        .def(py::init<double>(), py::arg("cm"))
        .def_readwrite("cm", &vlp::CameraHeight::cm);

    py::class_<vlp::CameraIntrinsics>(m, "CameraIntrinsics")
        .def_static("nominal", &vlp::CameraIntrinsics::nominal, py::arg("width"),
                    py::arg("height"), py::arg("pixel_pitch_mm"), py::arg("focal_length_mm"))
        .def_readwrite("width", &vlp::CameraIntrinsics::width)
        .def_readwrite("height", &vlp::CameraIntrinsics::height)
        .def_readwrite("du", &vlp::CameraIntrinsics::du)
        .def_readwrite("dv", &vlp::CameraIntrinsics::dv)
        .def_readwrite("dl", &vlp::CameraIntrinsics::dl)
        .def_readwrite("principal_point", &vlp::CameraIntrinsics::principal_point)
        .def_readwrite("focal_length", &vlp::CameraIntrinsics::focal_length);

    py::class_<vlp::LedFixture>(m, "LedFixture")
        .def(py::init([](int id, const vlp::WorldPoint& position, double radius_cm,
                         double mod_frequency_hz, double half_power_angle_deg) {
                 vlp::LedFixture f;
                 f.id = id;
                 f.position = position;
                 f.radius_cm = radius_cm;
                 f.mod_frequency_hz = mod_frequency_hz;
                 f.half_power_angle_deg = half_power_angle_deg;
                 return f;
             }),
             py::arg("id"), py::arg("position"), py::arg("radius_cm"),
             py::arg("mod_frequency_hz"), py::arg("half_power_angle_deg") = 60.0)
        .def_readwrite("id", &vlp::LedFixture::id)
        .def_readwrite("position", &vlp::LedFixture::position)
        .def_readwrite("radius_cm", &vlp::LedFixture::radius_cm)
        .def_readwrite("mod_frequency_hz", &vlp::LedFixture::mod_frequency_hz)
        .def_readwrite("half_power_angle_deg", &vlp::LedFixture::half_power_angle_deg);

    py::class_<vlp::LedRegistry>(m, "LedRegistry")
        .def(py::init<std::vector<vlp::LedFixture>>(), py::arg("fixtures"))
        .def("fixtures", &vlp::LedRegistry::fixtures)
        .def("by_id", &vlp::LedRegistry::by_id, py::arg("id"))
        .def("__len__", &vlp::LedRegistry::size);

    m.def("load_registry", &vlp::load_registry, py::arg("path"));

    py::class_<vlp::RollingShutterConfig>(m, "RollingShutterConfig")
        .def(py::init([](double exposure_ms, double row_readout_us, double frame_start_time_s) {
                 return vlp::RollingShutterConfig{exposure_ms, row_readout_us, frame_start_time_s};
             }),
             py::arg("exposure_ms") = 0.02, py::arg("row_readout_us") = 25.0,
             py::arg("frame_start_time_s") = 0.0)
        .def_readwrite("exposure_ms", &vlp::RollingShutterConfig::exposure_ms)
        .def_readwrite("row_readout_us", &vlp::RollingShutterConfig::row_readout_us)
        .def_readwrite("frame_start_time_s", &vlp::RollingShutterConfig::frame_start_time_s);

    py::class_<vlp::NoiseModel>(m, "NoiseModel")
        .def(py::init([](double gaussian_sigma, double centroid_jitter_sigma,
                         double background_level, double amplitude, uint64_t seed) {
                 return vlp::NoiseModel{gaussian_sigma, centroid_jitter_sigma, background_level,
                                        amplitude, seed};
             }),
             py::arg("gaussian_sigma") = 0.0, py::arg("centroid_jitter_sigma") = 0.0,
             py::arg("background_level") = 20.0, py::arg("amplitude") = 200.0,
             py::arg("seed") = 0)
        .def_readwrite("gaussian_sigma", &vlp::NoiseModel::gaussian_sigma)
        .def_readwrite("centroid_jitter_sigma", &vlp::NoiseModel::centroid_jitter_sigma)
        .def_readwrite("background_level", &vlp::NoiseModel::background_level)
        .def_readwrite("amplitude", &vlp::NoiseModel::amplitude)
        .def_readwrite("seed", &vlp::NoiseModel::seed);

    py::class_<vlp::PositionFix>(m, "PositionFix")
        .def_readonly("pose", &vlp::PositionFix::pose)
        .def_readonly("led_pair", &vlp::PositionFix::led_pair)
        .def_readonly("threshold", &vlp::PositionFix::threshold);

    m.def("normalize_angle", &vlp::normalize_angle, py::arg("theta"));
    m.def("pixel_to_image", &vlp::pixel_to_image, py::arg("p"), py::arg("k"));
    m.def("image_to_pixel", &vlp::image_to_pixel, py::arg("q"), py::arg("k"));
    m.def("estimate_azimuth", &vlp::estimate_azimuth, py::arg("c1"), py::arg("c2"),
          py::arg("min_separation_mm") = vlp::kDefaultMinSeparationMm);
    m.def("rotate_to_world", &vlp::rotate_to_world, py::arg("p_cam"), py::arg("theta"));
    m.def("project_led", &vlp::project_led, py::arg("led"), py::arg("camera"), py::arg("k"),
          py::arg("height"));
    m.def(
        "position_from_two_leds",
        [](int id1, const vlp::WorldPoint& w1, int id2, const vlp::WorldPoint& w2,
           const vlp::ImagePoint& c1, const vlp::ImagePoint& c2, const vlp::CameraIntrinsics& k,
           const vlp::CameraHeight& height) {
            return vlp::position_from_two_leds({id1, w1}, {id2, w2}, c1, c2, k, height);
        },
        py::arg("id1"), py::arg("world1"), py::arg("id2"), py::arg("world2"), py::arg("c1"),
        py::arg("c2"), py::arg("k"), py::arg("height"));

    m.def("led_waveform", &vlp::led_waveform, py::arg("fixture"), py::arg("t_s"));
    m.def(
        "render_frame",
        [](const vlp::LedRegistry& registry, const vlp::Pose2D& camera,
           const vlp::CameraIntrinsics& k, const vlp::RollingShutterConfig& rs,
           const vlp::NoiseModel& noise, const vlp::CameraHeight& height) {
            return array_from_frame(vlp::render_frame(registry, camera, k, rs, noise, height));
        },
        py::arg("registry"), py::arg("camera"), py::arg("k"), py::arg("rs"), py::arg("noise"),
        py::arg("height"));
    m.def(
        "disc_projection",
        [](const vlp::LedFixture& fixture, const vlp::Pose2D& camera,
           const vlp::CameraIntrinsics& k, const vlp::CameraHeight& height) {
            const vlp::DiscProjection d = vlp::disc_projection(fixture, camera, k, height);
            return py::make_tuple(d.center, d.radius_px);
        },
        py::arg("fixture"), py::arg("camera"), py::arg("k"), py::arg("height"));

    m.def(
        "otsu_threshold",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& image) {
            const vlp::Frame frame = frame_from_array(image);
            const vlp::OtsuResult r = vlp::otsu_threshold(vlp::histogram(frame));
            return py::make_tuple(r.threshold, r.degenerate);
        },
        py::arg("image"));
    m.def("bhattacharyya", &vlp::bhattacharyya, py::arg("p"), py::arg("q"));
    m.def(
        "estimate_stripe_period",
        [](const std::vector<double>& profile, double min_confidence) {
            vlp::StripeProfile p{profile};
            const vlp::PeriodEstimate est = vlp::estimate_stripe_period(p, min_confidence);
            return py::make_tuple(est.period_rows, est.confidence);
        },
        py::arg("profile"), py::arg("min_confidence") = 0.4);

    m.def(
        "fit_circle",
        [](const std::vector<std::pair<double, double>>& points) {
            const vlp::Circle c = vlp::fit_circle_kasa(vec2_list(points));
            return py::make_tuple(c.center.x, c.center.y, c.radius);
        },
        py::arg("points"));
    m.def(
        "smallest_enclosing_circle",
        [](const std::vector<std::pair<double, double>>& points) {
            const vlp::Circle c = vlp::smallest_enclosing_circle(vec2_list(points));
            return py::make_tuple(c.center.x, c.center.y, c.radius);
        },
        py::arg("points"));
    m.def(
        "dispersion_center_mean",
        [](const std::vector<std::pair<double, double>>& samples) {
            const vlp::Vec2 c = vlp::dispersion_center_mean(vec2_list(samples));
            return py::make_tuple(c.x, c.y);
        },
        py::arg("samples"));

    m.def(
        "locate",
        [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& image,
           const vlp::LedRegistry& registry, const vlp::CameraIntrinsics& k,
           const vlp::CameraHeight& height, const vlp::RollingShutterConfig& rs) {
            const vlp::Frame frame = frame_from_array(image);
            vlp::LocateOptions opts;
            opts.roi = vlp::default_roi_params(registry, rs);
            return vlp::locate(frame, registry, k, height, rs, opts);
        },
        py::arg("image"), py::arg("registry"), py::arg("k"), py::arg("height"), py::arg("rs"));
}
