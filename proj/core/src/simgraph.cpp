#include "mofq/simgraph.hpp"
#include "mofq/errors.hpp"

#include <cmath>

namespace mofq {

nonlinearity parse_nonlinearity(const std::string& tag) {
    if (tag == "none") return nonlinearity::none;
    if (tag == "relu") return nonlinearity::relu;
    if (tag == "gelu") return nonlinearity::gelu;
    throw parse_error("unknown nonlinearity '" + tag + "'");
}

const char* nonlinearity_name(nonlinearity n) {
    switch (n) {
        case nonlinearity::none: return "none";
        case nonlinearity::relu: return "relu";
        case nonlinearity::gelu: return "gelu";
    }
    return "?";
}

float apply_nonlinearity(nonlinearity n, float x) {
    switch (n) {
        case nonlinearity::none:
            return x;
        case nonlinearity::relu:
            return x > 0.0f ? x : 0.0f;
        case nonlinearity::gelu: {
            double xd = x;
            double inner = 0.7978845608028654 * (xd + 0.044715 * xd * xd * xd);
            return static_cast<float>(0.5 * xd * (1.0 + std::tanh(inner)));
        }
    }
    return x;
}

model_graph model_graph::from_bundle(const model_bundle& b) {
    validate_model_bundle(b);
    model_graph g;
    g.layers.reserve(b.layers.size());
    for (const auto& d : b.layers) {
        g.layers.push_back({d.name, b.tensors.at(d.weight), parse_nonlinearity(d.nonlinearity)});
    }
    return g;
}

const linear_layer* model_graph::find(const std::string& name) const {
    for (const auto& l : layers) {
        if (l.name == name) return &l;
    }
    return nullptr;
}

namespace {

// out[b,o] = act(sum_i w[o,i] * x[b,i]); accumulation in double.
tensor layer_forward(const linear_layer& l, const tensor& x) {
    if (x.rank() != 2 || x.dim(1) != l.in_width()) {
        throw value_error("layer " + l.name + ": input shape " + shape_str(x.shape) +
                          " does not match weight " + shape_str(l.w.shape));
    }
    int64_t batch = x.dim(0), out_w = l.out_width(), in_w = l.in_width();
    tensor out = tensor::zeros({batch, out_w});
    for (int64_t b = 0; b < batch; ++b) {
        const float* xr = x.data.data() + b * in_w;
        for (int64_t o = 0; o < out_w; ++o) {
            const float* wr = l.w.data.data() + o * in_w;
            double acc = 0.0;
            for (int64_t i = 0; i < in_w; ++i) {
                acc += static_cast<double>(wr[i]) * static_cast<double>(xr[i]);
            }
            out.data[static_cast<size_t>(b * out_w + o)] =
                apply_nonlinearity(l.act, static_cast<float>(acc));
        }
    }
    return out;
}

linear_layer quantized_view(const linear_layer& l, const layer_quant_config& cfg) {
    if (cfg.w && cfg.a && !(cfg.w->first.format == cfg.a->first.format)) {
        throw value_error("layer " + l.name +
                          ": weight and activation formats must match within a layer");
    }
    if (!cfg.w) return l;
    return {l.name, fake_quant(l.w, cfg.w->first, cfg.w->second), l.act};
}

} // namespace

forward_result forward_fp(const model_graph& m, const tensor& x) {
    validate_tensor(x, "forward input");
    forward_result r;
    tensor cur = x;
    for (const auto& l : m.layers) {
        cur = layer_forward(l, cur);
        r.layer_outputs.push_back(cur);
    }
    r.output = r.layer_outputs.back();
    return r;
}

forward_result forward_quant(const model_graph& m,
                             const std::vector<layer_quant_config>& configs,
                             const tensor& x) {
    validate_tensor(x, "forward input");
    if (configs.size() != m.layers.size()) {
        throw value_error("forward_quant: " + std::to_string(configs.size()) +
                          " configs for " + std::to_string(m.layers.size()) + " layers");
    }
    forward_result r;
    tensor cur = x;
    for (size_t k = 0; k < m.layers.size(); ++k) {
        const auto& cfg = configs[k];
        linear_layer lq = quantized_view(m.layers[k], cfg);
        const tensor* in = &cur;
        tensor quant_in;
        if (cfg.a) {
            quant_in = fake_quant(cur, cfg.a->first, cfg.a->second);
            in = &quant_in;
        }
        cur = layer_forward(lq, *in);
        r.layer_outputs.push_back(cur);
    }
    r.output = r.layer_outputs.back();
    return r;
}

double layer_output_error(const linear_layer& layer, const layer_quant_config& cfg,
                          const std::vector<tensor>& calib_batches, error_stat stat) {
    if (calib_batches.empty()) {
        throw value_error("layer " + layer.name + " not calibrated: no batches");
    }
    linear_layer lq = quantized_view(layer, cfg);

    double total = 0.0;
    for (const tensor& batch : calib_batches) {
        tensor ref = layer_forward(layer, batch);
        const tensor* in = &batch;
        tensor quant_in;
        if (cfg.a) {
            quant_in = fake_quant(batch, cfg.a->first, cfg.a->second);
            in = &quant_in;
        }
        tensor noisy = layer_forward(lq, *in);
        total += stat == error_stat::mse ? mse(ref, noisy) : nsr(ref, noisy);
    }
    return total / static_cast<double>(calib_batches.size());
}

} // namespace mofq
