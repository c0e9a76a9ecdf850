#include "vlp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vlp/rng.hpp"

namespace vlp {

LedRegistry::LedRegistry(std::vector<LedFixture> fixtures) : fixtures_(std::move(fixtures)) {
    std::sort(fixtures_.begin(), fixtures_.end(),
              [](const LedFixture& a, const LedFixture& b) { return a.id < b.id; });
    validate();
}

void LedRegistry::validate() const {
    for (size_t i = 0; i < fixtures_.size(); ++i) {
        const auto& f = fixtures_[i];
        require(f.mod_frequency_hz > 0, errc::validation,
                "fixture " + std::to_string(f.id) + ": modulation frequency must be positive");
        require(f.radius_cm > 0, errc::validation,
                "fixture " + std::to_string(f.id) + ": radius must be positive");
        require(f.half_power_angle_deg > 0 && f.half_power_angle_deg < 90, errc::validation,
                "fixture " + std::to_string(f.id) + ": half-power angle must be in (0, 90) deg");
        require(std::isfinite(f.position.x) && std::isfinite(f.position.y) &&
                    std::isfinite(f.position.z) && f.position.z >= 0,
                errc::validation, "fixture " + std::to_string(f.id) + ": bad position");
        for (size_t j = i + 1; j < fixtures_.size(); ++j) {
            const auto& g = fixtures_[j];
            require(f.id != g.id, errc::validation,
                    "duplicate fixture id " + std::to_string(f.id));
            require(std::abs(f.position.z - g.position.z) <= 1e-9, errc::validation,
                    "fixtures must share a common height");
            const double hi = std::max(f.mod_frequency_hz, g.mod_frequency_hz);
            const double lo = std::min(f.mod_frequency_hz, g.mod_frequency_hz);
            require(hi / lo >= kMinFrequencyRatio, errc::validation,
                    "fixtures " + std::to_string(f.id) + " and " + std::to_string(g.id) +
                        " have frequencies closer than ratio 1.25");
        }
    }
}

const LedFixture& LedRegistry::by_id(int id) const {
    for (const auto& f : fixtures_)
        if (f.id == id) return f;
    fail(errc::unknown_id, "no fixture with id " + std::to_string(id));
}

bool LedRegistry::has_id(int id) const {
    for (const auto& f : fixtures_)
        if (f.id == id) return true;
    return false;
}

double LedRegistry::plane_z_cm() const {
    require(!fixtures_.empty(), errc::empty_input, "registry is empty");
    return fixtures_.front().position.z;
}

LedRegistry parse_registry(const std::string& text, const std::string& origin) {
    std::vector<LedFixture> fixtures;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ls(line);
        LedFixture f;
        if (!(ls >> f.id >> f.position.x >> f.position.y >> f.position.z >> f.radius_cm >>
              f.mod_frequency_hz >> f.half_power_angle_deg))
            fail(errc::parse_error,
                 origin + ":" + std::to_string(line_no) + ": expected `id x y z radius freq angle`");
        std::string extra;
        if (ls >> extra)
            fail(errc::parse_error,
                 origin + ":" + std::to_string(line_no) + ": trailing token `" + extra + "`");
        fixtures.push_back(f);
    }
    return LedRegistry(std::move(fixtures));
}

LedRegistry load_registry(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open registry file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_registry(buf.str(), path);
}

void RollingShutterConfig::validate() const {
    require(exposure_ms > 0, errc::validation, "exposure time must be positive");
    require(row_readout_us > 0, errc::validation, "row readout time must be positive");
    require(frame_start_time_s >= 0, errc::validation, "frame start time must be non-negative");
}

void NoiseModel::validate() const {
    require(gaussian_sigma >= 0, errc::validation, "gaussian sigma must be non-negative");
    require(centroid_jitter_sigma >= 0, errc::validation, "centroid jitter must be non-negative");
    require(background_level >= 0 && background_level <= 255, errc::validation,
            "background level must be in [0, 255]");
    require(amplitude >= 0, errc::validation, "amplitude must be non-negative");
}

bool led_waveform(const LedFixture& fixture, double t_s) {
    require(t_s >= 0, errc::validation, "waveform time must be non-negative");
    const auto half_periods = static_cast<long long>(std::floor(2.0 * fixture.mod_frequency_hz * t_s));
    return (half_periods % 2) == 0;
}

double lambertian_order(double half_power_angle_deg) {
    return -std::log(2.0) / std::log(std::cos(half_power_angle_deg * M_PI / 180.0));
}

DiscProjection disc_projection(const LedFixture& fixture, const Pose2D& camera,
                               const CameraIntrinsics& k, const CameraHeight& height) {
    DiscProjection d;
    d.center = project_led(fixture.position, camera, k, height);
    d.radius_px = k.focal_length * fixture.radius_cm * 10.0 / (height.cm * 10.0 * k.dl);
    return d;
}

Frame render_frame(const LedRegistry& registry, const Pose2D& camera,
                   const CameraIntrinsics& k, const RollingShutterConfig& rs,
                   const NoiseModel& noise, const CameraHeight& height) {
    k.validate();
    rs.validate();
    noise.validate();

    Frame frame;
    frame.width = k.width;
    frame.height = k.height;
    frame.frame_start_time_s = rs.frame_start_time_s;
    frame.ground_truth = camera;
    frame.seed = noise.seed;

    const auto bg = static_cast<uint8_t>(std::lround(std::clamp(noise.background_level, 0.0, 255.0)));
    frame.pixels.assign(static_cast<size_t>(k.width) * k.height, bg);

    const double row_dt = rs.row_readout_s();
    for (const auto& fixture : registry.fixtures()) {
        const DiscProjection disc = disc_projection(fixture, camera, k, height);
        const double r = disc.radius_px;
        // Pixel (x, y) samples the scene at its centre (x + 0.5, y + 0.5).
        const double cx = disc.center.i - 0.5;
        const double cy = disc.center.j - 0.5;
        const int y0 = std::max(0, static_cast<int>(std::ceil(cy - r)));
        const int y1 = std::min(k.height - 1, static_cast<int>(std::floor(cy + r)));
        if (y1 < y0 || disc.center.i + r < 0 || disc.center.i - r > k.width) continue;

        const double dist = std::hypot(fixture.position.x - camera.x,
                                       fixture.position.y - camera.y);
        const double cos_phi = height.cm / std::hypot(height.cm, dist);
        const double m = lambertian_order(fixture.half_power_angle_deg);
        const double level = noise.background_level + noise.amplitude * std::pow(cos_phi, m);
        const auto lit = static_cast<uint8_t>(std::lround(std::clamp(level, 0.0, 255.0)));

        for (int y = y0; y <= y1; ++y) {
            const double t_row = rs.frame_start_time_s + y * row_dt;
            if (!led_waveform(fixture, t_row)) continue;
            const double dy = y - cy;
            const double half = std::sqrt(std::max(0.0, r * r - dy * dy));
            const int x0 = std::max(0, static_cast<int>(std::ceil(cx - half)));
            const int x1 = std::min(k.width - 1, static_cast<int>(std::floor(cx + half)));
            uint8_t* row = frame.pixels.data() + static_cast<size_t>(y) * k.width;
            for (int x = x0; x <= x1; ++x) row[x] = std::max(row[x], lit);
        }
    }

    if (noise.gaussian_sigma > 0) {
        Rng rng(noise.seed);
        const double sigma = noise.gaussian_sigma;
        for (auto& px : frame.pixels) {
            const int v = static_cast<int>(px + sigma * rng.next_gaussian() + 0.5);
            px = static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return frame;
}

std::string pgm_bytes(const Frame& frame) {
    std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
    return out;
}

void write_pgm(const Frame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), errc::io_error, "cannot open " + path + " for writing");
    const std::string bytes = pgm_bytes(frame);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), errc::io_error, "short write to " + path);
}

namespace {

int pgm_token(std::istream& in, const std::string& path) {
    // Skips whitespace and `#` comments between header tokens.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    require(c != EOF && std::isdigit(c), errc::parse_error, path + ": malformed PGM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        require(value <= 1 << 24, errc::parse_error, path + ": header value out of range");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return value;
}

}  // namespace

Frame read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    require(in.good() && magic[0] == 'P' && magic[1] == '5', errc::parse_error,
            path + ": not a binary PGM (P5) file");
    Frame frame;
    frame.width = pgm_token(in, path);
    frame.height = pgm_token(in, path);
    const int maxval = pgm_token(in, path);
    require(frame.width > 0 && frame.height > 0, errc::parse_error,
            path + ": non-positive dimensions");
    require(maxval == 255, errc::parse_error, path + ": expected maxval 255");
    const int sep = in.get();
    require(sep != EOF && std::isspace(sep), errc::parse_error,
            path + ": missing separator after header");
    frame.pixels.resize(static_cast<size_t>(frame.width) * frame.height);
    in.read(reinterpret_cast<char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
    require(in.gcount() == static_cast<std::streamsize>(frame.pixels.size()), errc::parse_error,
            path + ": truncated pixel data");
    return frame;
}

}  // namespace vlp
