#include "vlp/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vlp {

namespace {

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Cursor {
    std::string origin;
    int line = 0;
    int column = 1;

    [[noreturn]] void fail_here(const std::string& what) const {
        fail(errc::parse_error,
             origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
    }
};

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& value, const Cursor& at) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        at.fail_here("expected a number, got `" + value + "`");
    }
    if (pos != value.size()) at.fail_here("trailing characters after number `" + value + "`");
    return v;
}

int parse_int(const std::string& value, const Cursor& at) {
    const double v = parse_number(value, at);
    if (v != std::floor(v)) at.fail_here("expected an integer, got `" + value + "`");
    return static_cast<int>(v);
}

uint64_t parse_u64(const std::string& value, const Cursor& at) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        at.fail_here("expected an unsigned integer, got `" + value + "`");
    }
}

}  // namespace

CameraIntrinsics Config::intrinsics() const {
    return CameraIntrinsics::nominal(width, height, pixel_pitch_mm, focal_length_mm);
}

Scenario Config::scenario() const {
    Scenario sc;
    sc.registry = registry;
    sc.nominal = intrinsics();
    sc.true_offset_px = {offset_i_px, offset_j_px};
    sc.rs.exposure_ms = exposure_ms;
    sc.rs.row_readout_us = row_readout_us;
    sc.noise.gaussian_sigma = gaussian_sigma;
    sc.noise.centroid_jitter_sigma = centroid_jitter_sigma;
    sc.noise.background_level = background_level;
    sc.noise.amplitude = amplitude;
    sc.camera_z_cm = camera_z_cm;
    sc.platform_x0_cm = platform_x0_cm;
    sc.platform_y0_cm = platform_y0_cm;
    sc.platform_w_cm = platform_w_cm;
    sc.platform_l_cm = platform_l_cm;
    sc.dispersion_samples = dispersion_samples;
    sc.rotation_steps = rotation_steps;
    sc.rotation_target_id = rotation_target_id;
    sc.rotation_position = {rotation_x_cm, rotation_y_cm};
    return sc;
}

GridSpec Config::grid(uint64_t seed) const {
    GridSpec g = GridSpec::even_grid(grid_nx, grid_ny, grid_margin_cm, scenario(), theta_mode,
                                     theta_fixed_rad, seed);
    g.trials_per_point = trials_per_point;
    return g;
}

void Config::validate() const {
    const Scenario sc = scenario();
    sc.nominal.validate();
    sc.rs.validate();
    sc.noise.validate();
    require(platform_w_cm > 0 && platform_l_cm > 0, errc::validation,
            "platform dimensions must be positive");
    require(!registry.empty(), errc::validation, "registry must define at least one fixture");
    require(sc.camera_height().cm > 0, errc::validation,
            "camera must sit below the LED plane");
    require(grid_nx >= 1 && grid_ny >= 1 && trials_per_point >= 1, errc::validation,
            "grid dimensions and trial count must be positive");
    require(grid_margin_cm >= 0 && 2 * grid_margin_cm < std::min(platform_w_cm, platform_l_cm),
            errc::validation, "grid margin leaves no interior");
    require(dispersion_samples >= 1, errc::validation, "dispersion_samples must be >= 1");
    require(rotation_steps >= 3, errc::validation, "rotation_steps must be >= 3");
    require(sc.pose_in_platform({rotation_x_cm, rotation_y_cm, 0.0}), errc::validation,
            "rotation stand must be inside the platform");
    if (rotation_target_id != 0)
        require(registry.has_id(rotation_target_id), errc::validation,
                "rotation_target_id is not in the registry");
}

Config parse_config_text(const std::string& text, const std::string& origin,
                         const std::string& base_dir) {
    Config cfg;
    bool saw_registry = false;

    using Setter = std::function<void(Config&, const std::string&, const Cursor&)>;
    const auto num = [](double Config::*field) {
        return [field](Config& c, const std::string& v, const Cursor& at) {
            c.*field = parse_number(v, at);
        };
    };
    const auto integer = [](int Config::*field) {
        return [field](Config& c, const std::string& v, const Cursor& at) {
            c.*field = parse_int(v, at);
        };
    };

    std::map<std::string, Setter> setters = {
        {".registry", [&](Config& c, const std::string& v, const Cursor&) {
             c.registry_path = v;
         }},
        {".master_seed", [](Config& c, const std::string& v, const Cursor& at) {
             c.master_seed = parse_u64(v, at);
         }},
        {"camera.width", integer(&Config::width)},
        {"camera.height", integer(&Config::height)},
        {"camera.pixel_pitch_mm", num(&Config::pixel_pitch_mm)},
        {"camera.focal_length_mm", num(&Config::focal_length_mm)},
        {"camera.camera_z_cm", num(&Config::camera_z_cm)},
        {"platform.x0_cm", num(&Config::platform_x0_cm)},
        {"platform.y0_cm", num(&Config::platform_y0_cm)},
        {"platform.width_cm", num(&Config::platform_w_cm)},
        {"platform.length_cm", num(&Config::platform_l_cm)},
        {"rolling_shutter.exposure_ms", num(&Config::exposure_ms)},
        {"rolling_shutter.row_readout_us", num(&Config::row_readout_us)},
        {"noise.gaussian_sigma", num(&Config::gaussian_sigma)},
        {"noise.centroid_jitter_sigma", num(&Config::centroid_jitter_sigma)},
        {"noise.background_level", num(&Config::background_level)},
        {"noise.amplitude", num(&Config::amplitude)},
        {"grid.nx", integer(&Config::grid_nx)},
        {"grid.ny", integer(&Config::grid_ny)},
        {"grid.trials_per_point", integer(&Config::trials_per_point)},
        {"grid.margin_cm", num(&Config::grid_margin_cm)},
        {"grid.theta_mode", [](Config& c, const std::string& v, const Cursor& at) {
             if (v == "fixed")
                 c.theta_mode = ThetaMode::fixed;
             else if (v == "uniform")
                 c.theta_mode = ThetaMode::uniform;
             else
                 at.fail_here("theta_mode must be `fixed` or `uniform`");
         }},
        {"grid.theta_fixed_rad", num(&Config::theta_fixed_rad)},
        {"calibration.offset_i_px", num(&Config::offset_i_px)},
        {"calibration.offset_j_px", num(&Config::offset_j_px)},
        {"calibration.dispersion_samples", integer(&Config::dispersion_samples)},
        {"calibration.rotation_steps", integer(&Config::rotation_steps)},
        {"calibration.rotation_target_id", integer(&Config::rotation_target_id)},
        {"calibration.rotation_x_cm", num(&Config::rotation_x_cm)},
        {"calibration.rotation_y_cm", num(&Config::rotation_y_cm)},
    };

    std::istringstream in(text);
    std::string raw;
    Cursor at{origin, 0, 1};
    std::string section;
    while (std::getline(in, raw)) {
        ++at.line;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;

        if (body.front() == '[') {
            at.column = static_cast<int>(raw.find('[')) + 1;
            if (body.back() != ']') at.fail_here("unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section != "camera" && section != "platform" && section != "rolling_shutter" &&
                section != "noise" && section != "grid" && section != "calibration")
                at.fail_here("unknown section `" + section + "`");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            at.column = 1;
            at.fail_here("expected `key = value`");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        at.column = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
        if (key.empty()) at.fail_here("missing key before `=`");
        if (value.empty()) {
            at.column = static_cast<int>(eq) + 2;
            at.fail_here("missing value for `" + key + "`");
        }

        const std::string qualified = section + "." + key;
        const auto it = setters.find(section.empty() ? "." + key : qualified);
        if (it == setters.end()) at.fail_here("unknown key `" + key + "`");
        it->second(cfg, value, at);
        if (key == "registry") saw_registry = true;
    }

    require(saw_registry, errc::validation, origin + ": missing top-level `registry` path");
    std::filesystem::path reg_path(cfg.registry_path);
    if (reg_path.is_relative() && !base_dir.empty())
        reg_path = std::filesystem::path(base_dir) / reg_path;
    cfg.registry = load_registry(reg_path.string());
    cfg.validate();
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config_text(buf.str(), path, dir);
}

void write_config(const Config& c, std::ostream& out) {
    out << "registry = " << c.registry_path << '\n';
    out << "master_seed = " << c.master_seed << '\n';
    out << "\n[camera]\n";
    out << "width = " << c.width << '\n';
    out << "height = " << c.height << '\n';
    out << "pixel_pitch_mm = " << fmt_full(c.pixel_pitch_mm) << '\n';
    out << "focal_length_mm = " << fmt_full(c.focal_length_mm) << '\n';
    out << "camera_z_cm = " << fmt_full(c.camera_z_cm) << '\n';
    out << "\n[platform]\n";
    out << "x0_cm = " << fmt_full(c.platform_x0_cm) << '\n';
    out << "y0_cm = " << fmt_full(c.platform_y0_cm) << '\n';
    out << "width_cm = " << fmt_full(c.platform_w_cm) << '\n';
    out << "length_cm = " << fmt_full(c.platform_l_cm) << '\n';
    out << "\n[rolling_shutter]\n";
    out << "exposure_ms = " << fmt_full(c.exposure_ms) << '\n';
    out << "row_readout_us = " << fmt_full(c.row_readout_us) << '\n';
    out << "\n[noise]\n";
    out << "gaussian_sigma = " << fmt_full(c.gaussian_sigma) << '\n';
    out << "centroid_jitter_sigma = " << fmt_full(c.centroid_jitter_sigma) << '\n';
    out << "background_level = " << fmt_full(c.background_level) << '\n';
    out << "amplitude = " << fmt_full(c.amplitude) << '\n';
    out << "\n[grid]\n";
    out << "nx = " << c.grid_nx << '\n';
    out << "ny = " << c.grid_ny << '\n';
    out << "trials_per_point = " << c.trials_per_point << '\n';
    out << "margin_cm = " << fmt_full(c.grid_margin_cm) << '\n';
    out << "theta_mode = " << (c.theta_mode == ThetaMode::fixed ? "fixed" : "uniform") << '\n';
    out << "theta_fixed_rad = " << fmt_full(c.theta_fixed_rad) << '\n';
    out << "\n[calibration]\n";
    out << "offset_i_px = " << fmt_full(c.offset_i_px) << '\n';
    out << "offset_j_px = " << fmt_full(c.offset_j_px) << '\n';
    out << "dispersion_samples = " << c.dispersion_samples << '\n';
    out << "rotation_steps = " << c.rotation_steps << '\n';
    out << "rotation_target_id = " << c.rotation_target_id << '\n';
    out << "rotation_x_cm = " << fmt_full(c.rotation_x_cm) << '\n';
    out << "rotation_y_cm = " << fmt_full(c.rotation_y_cm) << '\n';
}

void write_corrected_intrinsics(const PixelPoint& principal_point, const std::string& method,
                                std::ostream& out) {
    out << "# corrected principal point (pixels)\n";
    out << "method = " << method << '\n';
    out << "principal_point_i = " << fmt_full(principal_point.i) << '\n';
    out << "principal_point_j = " << fmt_full(principal_point.j) << '\n';
}

PixelPoint read_corrected_intrinsics(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open intrinsics file " + path);
    PixelPoint pp;
    bool have_i = false, have_j = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Cursor at{path, line_no, 1};
        if (key == "principal_point_i") {
            pp.i = parse_number(value, at);
            have_i = true;
        } else if (key == "principal_point_j") {
            pp.j = parse_number(value, at);
            have_j = true;
        }
    }
    require(have_i && have_j, errc::parse_error, path + ": missing principal point entries");
    return pp;
}

}  // namespace vlp
