// vlp: simulate rolling-shutter beacon frames, locate a camera from them,
// calibrate the principal point and run the grid evaluation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vlp/config.hpp"

namespace {

constexpr const char* kConfigEnvVar = "VLP_CONFIG";

std::string resolve_config_path(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) return env;
    vlp::fail(vlp::errc::validation,
              std::string("no config given; pass --config or set ") + kConfigEnvVar);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    vlp::require(out.good(), vlp::errc::io_error, "cannot open " + path.string() + " for writing");
    out << text;
    vlp::require(out.good(), vlp::errc::io_error, "short write to " + path.string());
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    vlp::require(!ec && std::filesystem::is_directory(p), vlp::errc::io_error,
                 "cannot create output directory " + dir);
    return p;
}

int run_simulate(const std::string& config_path, const std::vector<double>& pose_values,
                 const std::string& out_path, uint64_t seed_override, bool has_seed) {
    const vlp::Config cfg = vlp::parse_config(resolve_config_path(config_path));
    vlp::require(pose_values.size() == 3, vlp::errc::validation,
                 "--pose expects `x_cm y_cm theta_rad`");
    const vlp::Pose2D pose{pose_values[0], pose_values[1],
                           vlp::normalize_angle(pose_values[2])};
    const vlp::Scenario sc = cfg.scenario();
    vlp::require(sc.pose_in_platform(pose), vlp::errc::validation,
                 "pose lies outside the platform");

    const uint64_t seed = has_seed ? seed_override : cfg.master_seed;
    const vlp::Frame frame = vlp::render_capture(sc, pose, seed);
    vlp::write_pgm(frame, out_path);
    std::cout << "frame " << out_path << " " << frame.width << " " << frame.height << " seed "
              << seed << "\n";
    std::cerr << "rendered pose (" << fmt(pose.x) << ", " << fmt(pose.y) << ", " << fmt(pose.theta)
              << ") to " << out_path << "\n";
    return 0;
}

int run_locate(const std::string& config_path, const std::string& frame_path,
               const std::string& intrinsics_path) {
    const vlp::Config cfg = vlp::parse_config(resolve_config_path(config_path));
    const vlp::Scenario sc = cfg.scenario();
    const vlp::Frame frame = vlp::read_pgm(frame_path);
    vlp::require(frame.width == cfg.width && frame.height == cfg.height, vlp::errc::validation,
                 "frame dimensions do not match the configured camera");

    vlp::CameraIntrinsics k = sc.nominal;
    if (!intrinsics_path.empty()) k.principal_point = vlp::read_corrected_intrinsics(intrinsics_path);

    vlp::LocateOptions opts;
    opts.roi = vlp::default_roi_params(sc.registry, sc.rs);
    const vlp::PositionFix fix =
        vlp::locate(frame, sc.registry, k, sc.camera_height(), sc.rs, opts);

    std::cout << "fix " << fmt(fix.pose.x) << " " << fmt(fix.pose.y) << " " << fmt(fix.pose.theta)
              << " pair " << fix.led_pair.first << " " << fix.led_pair.second << "\n";
    std::cerr << "position (" << fmt(fix.pose.x) << ", " << fmt(fix.pose.y) << ") cm, azimuth "
              << fmt(fix.pose.theta) << " rad from beacons " << fix.led_pair.first << "+"
              << fix.led_pair.second << "\n";
    return 0;
}

int run_calibrate(const std::string& config_path, const std::string& method_name,
                  const std::string& out_dir, uint64_t seed_override, bool has_seed) {
    const vlp::Config cfg = vlp::parse_config(resolve_config_path(config_path));
    const vlp::CalibrationMethod method = vlp::parse_calibration_method(method_name);
    vlp::require(method != vlp::CalibrationMethod::none, vlp::errc::validation,
                 "--method must be rotation or dispersion");
    const vlp::Scenario sc = cfg.scenario();
    const uint64_t seed = has_seed ? seed_override : cfg.master_seed;

    const vlp::CalibrationOutcome outcome = vlp::calibrate_end_to_end(method, sc, seed);

    const auto dir = ensure_out_dir(out_dir);
    {
        std::ostringstream text;
        vlp::write_corrected_intrinsics(outcome.corrected_point,
                                        vlp::calibration_method_name(method), text);
        write_text_file(dir / "corrected_intrinsics.cfg", text.str());
    }
    {
        std::ostringstream text;
        const std::string note = method == vlp::CalibrationMethod::rotation
                                     ? "rotation method: LED image positions, mm"
                                     : "dispersion method: origin fixes, cm";
        vlp::write_samples_csv(outcome.samples, note, text);
        write_text_file(dir / "samples.csv", text.str());
    }

    std::cout << "principal_point " << fmt(outcome.corrected_point.i) << " "
              << fmt(outcome.corrected_point.j) << " method "
              << vlp::calibration_method_name(method) << "\n";
    std::cerr << "nominal (" << fmt(sc.nominal.principal_point.i) << ", "
              << fmt(sc.nominal.principal_point.j) << ") -> corrected ("
              << fmt(outcome.corrected_point.i) << ", " << fmt(outcome.corrected_point.j)
              << ") using " << outcome.samples.size() << " samples\n";
    if (method == vlp::CalibrationMethod::dispersion)
        std::cerr << "dispersion centre: mean (" << fmt(outcome.mean_delta.x) << ", "
                  << fmt(outcome.mean_delta.y) << ") cm, min-circle ("
                  << fmt(outcome.min_circle_delta.x) << ", " << fmt(outcome.min_circle_delta.y)
                  << ") cm\n";
    return 0;
}

int run_evaluate(const std::string& config_path, const std::string& calibration_name,
                 const std::string& out_dir, uint64_t seed_override, bool has_seed) {
    const vlp::Config cfg = vlp::parse_config(resolve_config_path(config_path));
    const vlp::CalibrationMethod method = vlp::parse_calibration_method(calibration_name);
    const vlp::Scenario sc = cfg.scenario();
    const uint64_t seed = has_seed ? seed_override : cfg.master_seed;
    const vlp::GridSpec grid = cfg.grid(seed);

    const vlp::ExperimentResult result = vlp::run_grid_experiment(grid, sc, method, seed);

    const auto dir = ensure_out_dir(out_dir);
    {
        std::ostringstream text;
        vlp::write_results_csv(result.records, text);
        write_text_file(dir / "results.csv", text.str());
    }
    vlp::require_failure_budget(result.records);
    const vlp::ErrorStats stats = vlp::compute_stats(result.records);
    {
        std::ostringstream text;
        vlp::write_stats_csv(stats, text);
        write_text_file(dir / "stats.csv", text.str());
    }

    std::cout << "stats mean_cm " << fmt(stats.mean_cm) << " p90_cm " << fmt(stats.p90_cm)
              << " max_cm " << fmt(stats.max_cm) << " trials " << result.records.size()
              << " failures " << stats.failures << "\n";
    std::cerr << result.records.size() << " trials (" << grid.points.size() << " points x "
              << grid.trials_per_point << "), calibration "
              << vlp::calibration_method_name(method) << "\n";
    std::cerr << "mean " << fmt(stats.mean_cm) << " cm, p90 " << fmt(stats.p90_cm) << " cm, max "
              << fmt(stats.max_cm) << " cm -> " << (dir / "stats.csv").string() << "\n";
    if (method != vlp::CalibrationMethod::none) {
        const vlp::ReferenceStats ref = vlp::reference_stats(method);
        std::cerr << "published reference for this method: mean " << ref.mean_cm << " cm, p90 "
                  << ref.p90_cm << " cm, max " << ref.max_cm
                  << " cm (hardware-dependent, order-of-magnitude comparison only)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"visible-light positioning simulator and evaluation harness"};
    app.require_subcommand(1);

    std::string config_path, out_path, frame_path, intrinsics_path, method, calibration = "none";
    std::vector<double> pose_values;
    uint64_t seed = 0;

    auto* simulate = app.add_subcommand("simulate", "render one rolling-shutter frame to PGM");
    simulate->add_option("--config", config_path, "config file (or $VLP_CONFIG)");
    simulate->add_option("--pose", pose_values, "camera pose: x_cm y_cm theta_rad")
        ->expected(3)
        ->required();
    simulate->add_option("--out", out_path, "output PGM path")->required();
    auto* sim_seed = simulate->add_option("--seed", seed, "seed override");

    auto* locate = app.add_subcommand("locate", "estimate the camera pose from a PGM frame");
    locate->add_option("--config", config_path, "config file (or $VLP_CONFIG)");
    locate->add_option("--frame", frame_path, "input PGM frame")->required();
    locate->add_option("--intrinsics", intrinsics_path,
                       "corrected intrinsics from `calibrate`");

    auto* calibrate = app.add_subcommand("calibrate", "estimate the principal point correction");
    calibrate->add_option("--config", config_path, "config file (or $VLP_CONFIG)");
    calibrate->add_option("--method", method, "rotation | dispersion")->required();
    calibrate->add_option("--out", out_path, "output directory")->required();
    auto* cal_seed = calibrate->add_option("--seed", seed, "seed override");

    auto* evaluate = app.add_subcommand("evaluate", "run the grid experiment and emit CSVs");
    evaluate->add_option("--config", config_path, "config file (or $VLP_CONFIG)");
    evaluate->add_option("--calibration", calibration, "none | rotation | dispersion");
    evaluate->add_option("--out", out_path, "output directory")->required();
    auto* eval_seed = evaluate->add_option("--seed", seed, "seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(config_path, pose_values, out_path, seed, !sim_seed->empty());
        if (locate->parsed()) return run_locate(config_path, frame_path, intrinsics_path);
        if (calibrate->parsed())
            return run_calibrate(config_path, method, out_path, seed, !cal_seed->empty());
        if (evaluate->parsed())
            return run_evaluate(config_path, calibration, out_path, seed, !eval_seed->empty());
    } catch (const vlp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
