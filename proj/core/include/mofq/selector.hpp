#pragma once

#include "mofq/bundle.hpp"
#include "mofq/errors.hpp"
#include "mofq/metrics.hpp"
#include "mofq/simgraph.hpp"

#include <string>
#include <vector>

namespace mofq {

/*
 * Layer-wise mixture-of-formats selection: for every layer, quantize with
 * each candidate format (weights per-channel, activations per-tensor in WA
 * mode, one format per layer), measure the configured error metric, and
 * keep the argmin.
 *
 * By default a candidate is measured in isolation: all other layers run
 * unquantized, which makes per-layer choices order-independent. The
 * sequential flag instead keeps the formats already chosen for earlier
 * layers in effect while later layers are measured.
 */
struct selection_config {
    bool w_only = true;
    std::vector<number_format> candidates; // equal bit-width
    int bit_width = 4;
    error_metric_kind metric = error_metric_kind::tensor_mse;
    std::vector<std::string> tie_break; // precedence by name; default: INT first
    bool sequential = false;
};

struct candidate_error {
    std::string format;
    double error = 0.0;
};

struct layer_selection {
    std::string layer;
    std::string chosen;
    std::vector<candidate_error> errors; // candidate order
};

struct selection_report {
    selection_config config;
    std::vector<layer_selection> layers;
    double fp_fraction = 0.0; // share of layers on a floating-point format
    double wall_seconds = 0.0;
    bool complete = true;
};

struct selection_result {
    std::vector<layer_quant_config> configs; // chosen config per layer
    quantized_model qmodel;
    selection_report report;
};

// Thrown when selection dies partway; carries the layers evaluated so far.
struct selection_failure : select_error {
    selection_failure(const std::string& msg, selection_report partial)
        : select_error(msg), partial_report(std::move(partial)) {}
    selection_report partial_report;
};

selection_result mofq_select(const model_graph& model, const calib_bundle& calib,
                             const selection_config& cfg);

// Single-candidate pipeline; produces the INT-only / FP-only baselines.
selection_result quantize_uniform(const model_graph& model, const calib_bundle& calib,
                                  const number_format& format, bool w_only,
                                  error_metric_kind metric);

// JSON schema: {version, config, layers[], fp_fraction, timing_seconds, complete}.
std::string report_to_json(const selection_report& r);
// One row per layer x candidate: layer,candidate,error,chosen.
std::string report_to_csv(const selection_report& r);

} // namespace mofq
