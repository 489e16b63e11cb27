#pragma once

#include "mofq/bundle.hpp"
#include "mofq/metrics.hpp"
#include "mofq/quant.hpp"
#include "mofq/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mofq {

enum class nonlinearity { none, relu, gelu };

nonlinearity parse_nonlinearity(const std::string& tag);
const char* nonlinearity_name(nonlinearity n);

// A_out = act(W . A_in) with W of shape [out, in] and activations of
// shape [batch, width]. Matmul accumulates in 64-bit.
struct linear_layer {
    std::string name;
    tensor w;
    nonlinearity act = nonlinearity::none;

    int64_t out_width() const { return w.dim(0); }
    int64_t in_width() const { return w.dim(1); }
};

struct model_graph {
    std::vector<linear_layer> layers;

    static model_graph from_bundle(const model_bundle& b);
    const linear_layer* find(const std::string& name) const;
};

// Per-layer quantization; an absent side stays full precision. When both
// sides are present they must use the same number format (same data type
// and bit-width within a layer).
struct layer_quant_config {
    std::optional<std::pair<quant_scheme, scale_set>> w;
    std::optional<std::pair<quant_scheme, scale_set>> a;

    bool unquantized() const { return !w && !a; }
};

struct forward_result {
    tensor output;                     // alias of layer_outputs.back()
    std::vector<tensor> layer_outputs; // A_out per layer, metric hooks
};

forward_result forward_fp(const model_graph& m, const tensor& x);

// W replaced by fake_quant(W); with an activation config, A_in is replaced
// by fake_quant(A_in) using its calibrated scales. Matmul stays full
// precision. configs must cover every layer.
forward_result forward_quant(const model_graph& m,
                             const std::vector<layer_quant_config>& configs,
                             const tensor& x);

// Reference vs quantized A_out over calibration batches (the batches are
// the layer's reference inputs), one stat per batch, equal-weight average.
double layer_output_error(const linear_layer& layer, const layer_quant_config& cfg,
                          const std::vector<tensor>& calib_batches, error_stat stat);

// GELU uses the tanh approximation
//   0.5 * x * (1 + tanh(sqrt(2/pi) * (x + 0.044715 x^3)))
// with sqrt(2/pi) = 0.7978845608028654.
float apply_nonlinearity(nonlinearity n, float x);

} // namespace mofq
