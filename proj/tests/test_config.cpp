#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "vlp/config.hpp"

using namespace vlp;

#ifndef VLP_SOURCE_DIR
#define VLP_SOURCE_DIR "."
#endif

namespace {

const std::string kRepoRoot = VLP_SOURCE_DIR;

std::string registry_text() {
    return "1 13 159 285 16 2500 60\n2 159 159 285 16 2000 60\n3 159 13 285 16 1600 60\n";
}

// Minimal valid config next to a registry file in a temp dir.
struct TempConfig {
    std::filesystem::path dir;
    std::filesystem::path cfg;

    explicit TempConfig(const std::string& body) {
        dir = std::filesystem::temp_directory_path() / "vlp_cfg_test";
        std::filesystem::create_directories(dir);
        std::ofstream reg(dir / "leds.txt");
        reg << registry_text();
        reg.close();
        cfg = dir / "test.cfg";
        std::ofstream out(cfg);
        out << body;
    }
    ~TempConfig() { std::filesystem::remove_all(dir); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("the shipped default config parses to the documented platform") {
    const Config cfg = parse_config(kRepoRoot + "/configs/default.cfg");
    CHECK(cfg.width == 2048);
    CHECK(cfg.height == 1536);
    CHECK(cfg.exposure_ms == doctest::Approx(0.02));
    CHECK(cfg.registry.size() == 3);
    const WorldPoint led1 = cfg.registry.by_id(1).position;
    CHECK(led1.x == doctest::Approx(13.0));
    CHECK(led1.y == doctest::Approx(159.0));
    CHECK(led1.z == doctest::Approx(285.0));
    CHECK(cfg.platform_w_cm == doctest::Approx(146.0));
    CHECK(cfg.offset_i_px == doctest::Approx(10.0));
    CHECK(cfg.offset_j_px == doctest::Approx(-6.0));

    const Scenario sc = cfg.scenario();
    CHECK(sc.camera_height().cm == doctest::Approx(285.0));
    const GridSpec grid = cfg.grid(cfg.master_seed);
    CHECK(grid.points.size() == 36);
    CHECK(grid.trials_per_point == 12);
}

TEST_CASE("config write/parse round trip preserves every value") {
    Config cfg = parse_config(kRepoRoot + "/configs/default.cfg");
    cfg.gaussian_sigma = 3.14159265358979;
    cfg.master_seed = 987654321;
    cfg.theta_mode = ThetaMode::fixed;
    cfg.theta_fixed_rad = -0.75;
    cfg.offset_i_px = 1.0 / 3.0;

    std::ostringstream out;
    write_config(cfg, out);
    TempConfig tmp(out.str());
    const Config back = parse_config(tmp.cfg.string());

    CHECK(back.width == cfg.width);
    CHECK(back.height == cfg.height);
    CHECK(back.pixel_pitch_mm == cfg.pixel_pitch_mm);
    CHECK(back.focal_length_mm == cfg.focal_length_mm);
    CHECK(back.camera_z_cm == cfg.camera_z_cm);
    CHECK(back.platform_x0_cm == cfg.platform_x0_cm);
    CHECK(back.platform_y0_cm == cfg.platform_y0_cm);
    CHECK(back.platform_w_cm == cfg.platform_w_cm);
    CHECK(back.platform_l_cm == cfg.platform_l_cm);
    CHECK(back.exposure_ms == cfg.exposure_ms);
    CHECK(back.row_readout_us == cfg.row_readout_us);
    CHECK(back.gaussian_sigma == cfg.gaussian_sigma);
    CHECK(back.centroid_jitter_sigma == cfg.centroid_jitter_sigma);
    CHECK(back.background_level == cfg.background_level);
    CHECK(back.amplitude == cfg.amplitude);
    CHECK(back.grid_nx == cfg.grid_nx);
    CHECK(back.grid_ny == cfg.grid_ny);
    CHECK(back.trials_per_point == cfg.trials_per_point);
    CHECK(back.grid_margin_cm == cfg.grid_margin_cm);
    CHECK(back.theta_mode == cfg.theta_mode);
    CHECK(back.theta_fixed_rad == cfg.theta_fixed_rad);
    CHECK(back.offset_i_px == cfg.offset_i_px);
    CHECK(back.offset_j_px == cfg.offset_j_px);
    CHECK(back.dispersion_samples == cfg.dispersion_samples);
    CHECK(back.rotation_steps == cfg.rotation_steps);
    CHECK(back.rotation_target_id == cfg.rotation_target_id);
    CHECK(back.rotation_x_cm == cfg.rotation_x_cm);
    CHECK(back.rotation_y_cm == cfg.rotation_y_cm);
    CHECK(back.master_seed == cfg.master_seed);
}

TEST_CASE("unknown keys and malformed lines carry line diagnostics") {
    auto expect_parse_error = [](const std::string& body, const std::string& needle) {
        TempConfig tmp(body);
        try {
            parse_config(tmp.cfg.string());
            FAIL("expected parse error for: " << needle);
        } catch (const Error& e) {
            CHECK(e.code() == errc::parse_error);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_parse_error("registry = leds.txt\nbogus_key = 1\n", "bogus_key");
    expect_parse_error("registry = leds.txt\n[camera]\nwidth = abc\n", ":3:");
    expect_parse_error("registry = leds.txt\n[nonsense]\n", "nonsense");
    expect_parse_error("registry = leds.txt\n[camera]\nwidth 2048\n", "key = value");
    expect_parse_error("registry = leds.txt\n[camera]\nwidth =\n", "missing value");
}

TEST_CASE("validation failures name the violated invariant") {
    auto expect_validation = [](const std::string& body, const std::string& needle) {
        TempConfig tmp(body);
        try {
            parse_config(tmp.cfg.string());
            FAIL("expected validation error for: " << needle);
        } catch (const Error& e) {
            CHECK(e.code() == errc::validation);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_validation("master_seed = 1\n", "registry");
    expect_validation("registry = leds.txt\n[camera]\nwidth = -5\n", "dimensions");
    expect_validation("registry = leds.txt\n[rolling_shutter]\nrow_readout_us = 0\n",
                      "row readout");
    expect_validation("registry = leds.txt\n[grid]\nnx = 0\n", "grid");
    expect_validation("registry = leds.txt\n[calibration]\nrotation_target_id = 9\n",
                      "rotation_target_id");
}

TEST_CASE("a registry with a duplicate id fails at config load") {
    TempConfig tmp("registry = leds.txt\n");
    std::ofstream reg(tmp.dir / "leds.txt");
    reg << "1 13 159 285 16 2500 60\n1 159 159 285 16 2000 60\n";
    reg.close();
    try {
        parse_config(tmp.cfg.string());
        FAIL("expected validation error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::validation);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
}

TEST_CASE("a missing registry file is an i/o error") {
    TempConfig tmp("registry = nowhere.txt\n");
    try {
        parse_config(tmp.cfg.string());
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.code() == errc::io_error);
    }
}

TEST_CASE("corrected intrinsics round trip") {
    std::ostringstream out;
    write_corrected_intrinsics({1034.25, 761.75}, "dispersion", out);
    const auto path = std::filesystem::temp_directory_path() / "vlp_corr_test.cfg";
    std::ofstream file(path);
    file << out.str();
    file.close();
    const PixelPoint pp = read_corrected_intrinsics(path.string());
    CHECK(pp.i == doctest::Approx(1034.25));
    CHECK(pp.j == doctest::Approx(761.75));
    std::filesystem::remove(path);
}

}  // TEST_SUITE
