#pragma once

#include <stdexcept>
#include <string>

namespace vlp {

// Stable error classes. The numeric values double as CLI exit codes and
// must not be reordered (documented in the README).
enum class errc : int {
    parse_error = 2,
    validation = 3,
    io_error = 4,
    coincident_centroids = 5,
    height_mismatch = 6,
    behind_camera = 7,
    not_normalized = 8,
    track_lost = 9,
    roi_too_small = 10,
    no_periodicity = 11,
    unknown_id = 12,
    ambiguous_id = 13,
    empty_input = 14,
    insufficient_samples = 15,
    degenerate_fit = 16,
    insufficient_beacons = 17,
    experiment_failed = 18,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace vlp
