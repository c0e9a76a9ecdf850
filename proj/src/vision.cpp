#include "vlp/vision.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vlp {

uint64_t GrayHistogram::total() const {
    uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

GrayHistogram histogram(const Frame& frame) {
    GrayHistogram h;
    for (uint8_t px : frame.pixels) ++h.counts[px];
    return h;
}

namespace {

// Between-class variance as an exact rational: score = num^2 / den with
// num = s0*n1 - s1*n0 and den = n0*n1 (zero when either class is empty).
struct OtsuScore {
    unsigned __int128 num_sq = 0;
    uint64_t den = 1;

    bool is_zero() const { return num_sq == 0 || den == 0; }
};

struct U192 {
    unsigned __int128 hi;
    uint64_t lo;
};

U192 mul_128_64(unsigned __int128 a, uint64_t b) {
    const unsigned __int128 lo_prod = static_cast<unsigned __int128>(static_cast<uint64_t>(a)) * b;
    const unsigned __int128 hi_prod = (a >> 64) * b;
    return {hi_prod + (lo_prod >> 64), static_cast<uint64_t>(lo_prod)};
}

// score_a <=> score_b, comparing num_a^2 * den_b with num_b^2 * den_a exactly.
int compare_scores(const OtsuScore& a, const OtsuScore& b) {
    if (a.is_zero() && b.is_zero()) return 0;
    if (a.is_zero()) return -1;
    if (b.is_zero()) return 1;
    const U192 lhs = mul_128_64(a.num_sq, b.den);
    const U192 rhs = mul_128_64(b.num_sq, a.den);
    if (lhs.hi != rhs.hi) return lhs.hi < rhs.hi ? -1 : 1;
    if (lhs.lo != rhs.lo) return lhs.lo < rhs.lo ? -1 : 1;
    return 0;
}

}  // namespace

OtsuResult otsu_threshold(const GrayHistogram& h) {
    const uint64_t total = h.total();
    require(total > 0, errc::empty_input, "histogram is empty");

    int levels_used = 0;
    int single_level = 0;
    for (int v = 0; v < 256; ++v) {
        if (h.counts[v] > 0) {
            ++levels_used;
            single_level = v;
        }
    }
    if (levels_used == 1) return {single_level, true};

    std::array<OtsuScore, 255> scores;
    uint64_t n0 = 0, s0 = 0, s_total = 0;
    for (int v = 0; v < 256; ++v) s_total += h.counts[v] * static_cast<uint64_t>(v);
    for (int t = 0; t < 255; ++t) {
        n0 += h.counts[t];
        s0 += h.counts[t] * static_cast<uint64_t>(t);
        const uint64_t n1 = total - n0;
        const uint64_t s1 = s_total - s0;
        OtsuScore sc;
        if (n0 == 0 || n1 == 0) {
            sc.num_sq = 0;
            sc.den = 0;
        } else {
            const unsigned __int128 lhs = static_cast<unsigned __int128>(s0) * n1;
            const unsigned __int128 rhs = static_cast<unsigned __int128>(s1) * n0;
            // |diff| <= 255 * total^2, within u64 for any frame-sized input.
            const unsigned __int128 diff = lhs > rhs ? lhs - rhs : rhs - lhs;
            const auto d64 = static_cast<uint64_t>(diff);
            sc.num_sq = static_cast<unsigned __int128>(d64) * d64;
            sc.den = n0 * n1;
        }
        scores[t] = sc;
    }

    int best = 0;
    for (int t = 1; t < 255; ++t)
        if (compare_scores(scores[t], scores[best]) > 0) best = t;

    // Longest contiguous run of maximizers, earliest run on ties.
    int run_start = -1, best_start = best, best_len = 0;
    for (int t = 0; t <= 255; ++t) {
        const bool is_max = t < 255 && compare_scores(scores[t], scores[best]) == 0;
        if (is_max) {
            if (run_start < 0) run_start = t;
        } else if (run_start >= 0) {
            const int len = t - run_start;
            if (len > best_len) {
                best_len = len;
                best_start = run_start;
            }
            run_start = -1;
        }
    }
    return {(best_start + (best_start + best_len - 1)) / 2, false};
}

namespace {

// One sliding-window pass of a vertical structuring element, row-major for
// cache friendliness: per column, a running count of set pixels in the
// window [y-half, y+half] clamped to the image.
void vertical_window_pass(const std::vector<uint8_t>& src, std::vector<uint8_t>& dst, int width,
                          int height, int half, bool dilate) {
    std::vector<uint16_t> count(static_cast<size_t>(width), 0);
    for (int y = 0; y <= std::min(half, height - 1); ++y) {
        const uint8_t* row = src.data() + static_cast<size_t>(y) * width;
        for (int x = 0; x < width; ++x) count[x] += row[x];
    }
    for (int y = 0; y < height; ++y) {
        const int lo = std::max(0, y - half);
        const int hi = std::min(height - 1, y + half);
        const auto window = static_cast<uint16_t>(hi - lo + 1);
        uint8_t* out = dst.data() + static_cast<size_t>(y) * width;
        if (dilate) {
            for (int x = 0; x < width; ++x) out[x] = count[x] > 0 ? 1 : 0;
        } else {
            for (int x = 0; x < width; ++x) out[x] = count[x] == window ? 1 : 0;
        }
        const int add = y + 1 + half;
        if (add < height) {
            const uint8_t* row = src.data() + static_cast<size_t>(add) * width;
            for (int x = 0; x < width; ++x) count[x] += row[x];
        }
        const int remove = y - half;
        if (remove >= 0) {
            const uint8_t* row = src.data() + static_cast<size_t>(remove) * width;
            for (int x = 0; x < width; ++x) count[x] -= row[x];
        }
    }
}

// Vertical morphological closing. The window clamps at the image border, so
// boundary runs keep their outer endpoints.
void close_vertical(std::vector<uint8_t>& mask, int width, int height, int se_height) {
    if (se_height <= 1) return;
    const int half = se_height / 2;
    std::vector<uint8_t> dilated(mask.size());
    vertical_window_pass(mask, dilated, width, height, half, true);
    vertical_window_pass(dilated, mask, width, height, half, false);
}

bool windows_overlap(const RoiWindow& a, const RoiWindow& b) {
    return a.x <= b.x + b.w - 1 && b.x <= a.x + a.w - 1 && a.y <= b.y + b.h - 1 &&
           b.y <= a.y + a.h - 1;
}

}  // namespace

std::vector<RoiWindow> extract_rois(const Frame& frame, int threshold, const RoiParams& params) {
    const int w = frame.width, h = frame.height;
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<uint8_t> mask(n);
    for (size_t i = 0; i < n; ++i) mask[i] = frame.pixels[i] > threshold ? 1 : 0;
    close_vertical(mask, w, h, params.closing_height);

    std::vector<int32_t> labels(n, 0);
    std::vector<size_t> stack;
    std::vector<RoiWindow> rois;
    int32_t next_label = 0;

    for (size_t start = 0; start < n; ++start) {
        if (!mask[start] || labels[start]) continue;
        ++next_label;
        stack.assign(1, start);
        labels[start] = next_label;
        long long area = 0;
        int min_x = w, max_x = -1, min_y = h, max_y = -1;
        double wsum = 0.0, wi = 0.0, wj = 0.0;
        long long ui = 0, uj = 0;  // unweighted fallback sums
        while (!stack.empty()) {
            const size_t p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % w);
            const int y = static_cast<int>(p / w);
            ++area;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
            const double excess = static_cast<double>(frame.pixels[p]) - threshold;
            if (excess > 0) {
                wsum += excess;
                wi += excess * (x + 0.5);
                wj += excess * (y + 0.5);
            }
            ui += x;
            uj += y;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const size_t q = static_cast<size_t>(ny) * w + nx;
                    if (mask[q] && !labels[q]) {
                        labels[q] = next_label;
                        stack.push_back(q);
                    }
                }
            }
        }
        RoiWindow roi;
        roi.x = min_x;
        roi.y = min_y;
        roi.w = max_x - min_x + 1;
        roi.h = max_y - min_y + 1;
        roi.area = area;
        if (wsum > 0) {
            roi.centroid = {wi / wsum, wj / wsum};
        } else {
            roi.centroid = {static_cast<double>(ui) / area + 0.5,
                            static_cast<double>(uj) / area + 0.5};
        }
        if (area >= params.min_area && roi.w >= params.min_roi_size &&
            roi.h >= params.min_roi_size)
            rois.push_back(roi);
    }

    std::sort(rois.begin(), rois.end(),
              [](const RoiWindow& a, const RoiWindow& b) { return a.area > b.area; });
    std::vector<RoiWindow> kept;
    for (const auto& roi : rois) {
        bool clashes = false;
        for (const auto& k : kept)
            if (windows_overlap(roi, k)) {
                clashes = true;
                break;
            }
        if (!clashes) kept.push_back(roi);
    }
    return kept;
}

double bhattacharyya(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), errc::not_normalized, "histogram sizes differ");
    double sp = 0.0, sq = 0.0;
    for (double v : p) sp += v;
    for (double v : q) sq += v;
    require(std::abs(sp - 1.0) <= 1e-9 && std::abs(sq - 1.0) <= 1e-9, errc::not_normalized,
            "histograms must each sum to 1");
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) s += std::sqrt(p[i] * q[i]);
    return std::min(s, 1.0);
}

namespace {

using Mat4 = std::array<double, 16>;

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a[i * 4 + k];
            for (int j = 0; j < 4; ++j) c[i * 4 + j] += aik * b[k * 4 + j];
        }
    return c;
}

Mat4 mat4_transpose(const Mat4& a) {
    Mat4 t{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t[j * 4 + i] = a[i * 4 + j];
    return t;
}

constexpr Mat4 kTransition = {1, 0, 1, 0,   // x += vx
                              0, 1, 0, 1,   // y += vy
                              0, 0, 1, 0,   //
                              0, 0, 0, 1};

struct GateBuffer {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<uint8_t> pixels;

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * w + x]; }
};

GateBuffer extract_gate(const Frame& frame, double cx, double cy, int gw, int gh) {
    GateBuffer g;
    g.x0 = std::clamp(static_cast<int>(std::lround(cx - gw / 2.0)), 0, std::max(0, frame.width - 1));
    g.y0 = std::clamp(static_cast<int>(std::lround(cy - gh / 2.0)), 0, std::max(0, frame.height - 1));
    g.w = std::min(gw, frame.width - g.x0);
    g.h = std::min(gh, frame.height - g.y0);
    g.pixels.resize(static_cast<size_t>(g.w) * g.h);
    for (int y = 0; y < g.h; ++y)
        std::memcpy(g.pixels.data() + static_cast<size_t>(y) * g.w,
                    frame.pixels.data() + static_cast<size_t>(g.y0 + y) * frame.width + g.x0,
                    static_cast<size_t>(g.w));
    return g;
}

std::vector<double> window_histogram(const GateBuffer& g, double cx, double cy, int ww, int wh,
                                     int bins) {
    std::vector<double> hist(static_cast<size_t>(bins), 0.0);
    const int x0 = std::max(0, static_cast<int>(std::lround(cx - g.x0 - ww / 2.0)));
    const int y0 = std::max(0, static_cast<int>(std::lround(cy - g.y0 - wh / 2.0)));
    const int x1 = std::min(g.w, x0 + ww);
    const int y1 = std::min(g.h, y0 + wh);
    double total = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            ++hist[g.at(x, y) * bins / 256];
            ++total;
        }
    if (total > 0)
        for (auto& v : hist) v /= total;
    return hist;
}

}  // namespace

TrackState init_track(const Frame& frame, const RoiWindow& roi, int threshold,
                      const TrackerParams& params) {
    TrackState s;
    s.state = {roi.centroid.i, roi.centroid.j, 0.0, 0.0};
    s.covariance.fill(0.0);
    for (int i = 0; i < 4; ++i) s.covariance[i * 4 + i] = params.initial_covariance;
    s.threshold = threshold;

    // Kernel size from the blob's second moments (4 sigma ~ full extent of a
    // solid disc), clamped to the detection's bounding box.
    double wsum = 0, sxx = 0, syy = 0;
    for (int y = roi.y; y < roi.y + roi.h; ++y)
        for (int x = roi.x; x < roi.x + roi.w; ++x) {
            const double excess = static_cast<double>(frame.at(x, y)) - threshold;
            if (excess <= 0) continue;
            wsum += excess;
            sxx += excess * (x + 0.5 - roi.centroid.i) * (x + 0.5 - roi.centroid.i);
            syy += excess * (y + 0.5 - roi.centroid.j) * (y + 0.5 - roi.centroid.j);
        }
    if (wsum > 0) {
        s.window_w = std::clamp(static_cast<int>(std::lround(4.0 * std::sqrt(sxx / wsum))),
                                params.min_window, roi.w);
        s.window_h = std::clamp(static_cast<int>(std::lround(4.0 * std::sqrt(syy / wsum))),
                                params.min_window, roi.h);
    } else {
        s.window_w = roi.w;
        s.window_h = roi.h;
    }

    GateBuffer g = extract_gate(frame, roi.centroid.i, roi.centroid.j, roi.w, roi.h);
    s.reference_histogram =
        window_histogram(g, roi.centroid.i, roi.centroid.j, s.window_w, s.window_h,
                         params.histogram_bins);
    return s;
}

TrackStepResult track_step(TrackState& s, const Frame& frame, const TrackerParams& params) {
    // Predict.
    const Mat4 F = kTransition;
    std::array<double, 4> x_pred{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x_pred[i] += F[i * 4 + j] * s.state[j];
    Mat4 P = mat4_mul(mat4_mul(F, s.covariance), mat4_transpose(F));
    for (int i = 0; i < 4; ++i) P[i * 4 + i] += params.process_noise;

    const int gate_w = std::max(params.min_window,
                                static_cast<int>(std::lround(params.gate_scale * s.window_w)));
    const int gate_h = std::max(params.min_window,
                                static_cast<int>(std::lround(params.gate_scale * s.window_h)));
    GateBuffer gate = extract_gate(frame, x_pred[0], x_pred[1], gate_w, gate_h);
    s.last_processed_pixels = static_cast<long long>(gate.w) * gate.h;

    // Mean shift over the binarized gate.
    double cx = x_pred[0], cy = x_pred[1];
    bool found = false;
    for (int iter = 0; iter < params.max_mean_shift_iters; ++iter) {
        const int x0 = std::max(0, static_cast<int>(std::lround(cx - gate.x0 - s.window_w / 2.0)));
        const int y0 = std::max(0, static_cast<int>(std::lround(cy - gate.y0 - s.window_h / 2.0)));
        const int x1 = std::min(gate.w, x0 + s.window_w);
        const int y1 = std::min(gate.h, y0 + s.window_h);
        long long count = 0;
        double sx = 0, sy = 0;
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x)
                if (gate.at(x, y) > s.threshold) {
                    ++count;
                    sx += gate.x0 + x + 0.5;
                    sy += gate.y0 + y + 0.5;
                }
        if (count == 0) break;
        found = true;
        const double nx = sx / count, ny = sy / count;
        const double shift = std::hypot(nx - cx, ny - cy);
        cx = nx;
        cy = ny;
        if (shift < params.mean_shift_tol_px) break;
    }

    double b_score = 0.0;
    if (found) {
        const auto cand =
            window_histogram(gate, cx, cy, s.window_w, s.window_h, params.histogram_bins);
        double total = 0.0;
        for (double v : cand) total += v;
        if (total > 0.5) b_score = bhattacharyya(cand, s.reference_histogram);
    }
    s.last_bhattacharyya = b_score;

    TrackStepResult result;
    if (!found || b_score < params.bhattacharyya_floor) {
        // Coast: keep the prediction, skip the measurement entirely.
        s.state = x_pred;
        s.covariance = P;
        ++s.coast_count;
        result.coasted = true;
        require(s.coast_count <= params.max_coast_frames, errc::track_lost,
                "target not re-acquired within the coast budget");
        result.window.centroid = {x_pred[0], x_pred[1]};
    } else {
        // Kalman update with the mean-shift measurement; R grows as the
        // histogram similarity drops.
        const double r = (1.0 - b_score + params.noise_epsilon) * params.measurement_noise;
        // S = H P H^T + R is 2x2 since H picks the position block.
        const double s00 = P[0] + r, s01 = P[1], s10 = P[4], s11 = P[5] + r;
        const double det = s00 * s11 - s01 * s10;
        std::array<double, 8> K{};  // 4x2 gain
        for (int i = 0; i < 4; ++i) {
            const double pi0 = P[i * 4 + 0], pi1 = P[i * 4 + 1];
            K[i * 2 + 0] = (pi0 * s11 - pi1 * s10) / det;
            K[i * 2 + 1] = (pi1 * s00 - pi0 * s01) / det;
        }
        const double inno_x = cx - x_pred[0], inno_y = cy - x_pred[1];
        for (int i = 0; i < 4; ++i)
            s.state[i] = x_pred[i] + K[i * 2] * inno_x + K[i * 2 + 1] * inno_y;
        // Joseph form keeps the covariance symmetric PSD.
        Mat4 ikh{};
        for (int i = 0; i < 4; ++i) ikh[i * 4 + i] = 1.0;
        for (int i = 0; i < 4; ++i) {
            ikh[i * 4 + 0] -= K[i * 2 + 0];
            ikh[i * 4 + 1] -= K[i * 2 + 1];
        }
        Mat4 next = mat4_mul(mat4_mul(ikh, P), mat4_transpose(ikh));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                next[i * 4 + j] += r * (K[i * 2] * K[j * 2] + K[i * 2 + 1] * K[j * 2 + 1]);
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                const double v = 0.5 * (next[i * 4 + j] + next[j * 4 + i]);
                next[i * 4 + j] = next[j * 4 + i] = v;
            }
        s.covariance = next;
        s.coast_count = 0;
        result.window.centroid = {s.state[0], s.state[1]};
    }

    result.window.w = s.window_w;
    result.window.h = s.window_h;
    result.window.x = std::clamp(static_cast<int>(std::lround(result.window.centroid.i)) -
                                     s.window_w / 2,
                                 0, std::max(0, frame.width - s.window_w));
    result.window.y = std::clamp(static_cast<int>(std::lround(result.window.centroid.j)) -
                                     s.window_h / 2,
                                 0, std::max(0, frame.height - s.window_h));
    return result;
}

}  // namespace vlp
