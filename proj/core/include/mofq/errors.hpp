#pragma once

#include <stdexcept>
#include <string>

namespace mofq {

// Bad format names, distribution specs, malformed flag values. CLI exit 2.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data/validation failures: shape mismatches, non-finite inputs, bad scheme
// for a tensor. CLI exit 3.
struct value_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Container format failures. CLI exit 3.
struct bundle_error : std::runtime_error {
    enum class kind {
        bad_manifest,     // missing/unparseable manifest.json
        version_mismatch, // manifest version != 1
        missing_blob,     // manifest references a blob file that is absent
        shape_mismatch,   // blob size disagrees with manifest shape
        invalid_model,    // layer chain or tensor invariant violated
    };

    bundle_error(kind k, const std::string& msg) : std::runtime_error(msg), which(k) {}
    kind which;
};

// Format selection failures (empty candidate list, metric evaluation
// failure, uncalibrated layer). CLI exit 4.
struct select_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mofq
