#include "vlp/error.hpp"

namespace vlp {

const char* errc_name(errc c) {
    switch (c) {
        case errc::parse_error: return "parse error";
        case errc::validation: return "validation error";
        case errc::io_error: return "i/o error";
        case errc::coincident_centroids: return "coincident centroids";
        case errc::height_mismatch: return "height mismatch";
        case errc::behind_camera: return "behind camera";
        case errc::not_normalized: return "histogram not normalized";
        case errc::track_lost: return "track lost";
        case errc::roi_too_small: return "roi too small";
        case errc::no_periodicity: return "no periodicity";
        case errc::unknown_id: return "unknown led id";
        case errc::ambiguous_id: return "ambiguous led id";
        case errc::empty_input: return "empty input";
        case errc::insufficient_samples: return "insufficient samples";
        case errc::degenerate_fit: return "degenerate fit";
        case errc::insufficient_beacons: return "insufficient beacons";
        case errc::experiment_failed: return "experiment failed";
    }
    return "error";
}

}  // namespace vlp
