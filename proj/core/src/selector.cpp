#include "mofq/selector.hpp"
#include "mofq/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>

namespace mofq {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Smaller rank wins on exact error ties.
size_t tie_rank(const selection_config& cfg, const number_format& f, size_t cand_idx) {
    if (!cfg.tie_break.empty()) {
        std::string name = f.name();
        for (size_t i = 0; i < cfg.tie_break.size(); ++i) {
            if (cfg.tie_break[i] == name) return i;
        }
        return cfg.tie_break.size() + cand_idx;
    }
    return (f.is_int() ? 0 : 1000) + cand_idx;
}

struct candidate_state {
    layer_quant_config cfg;
    double error = 0.0;
};

const std::vector<tensor>& batches_for(const calib_bundle& calib, const std::string& layer) {
    auto it = calib.batches.find(layer);
    if (it == calib.batches.end() || it->second.empty()) {
        throw select_error("layer " + layer + " not calibrated");
    }
    return it->second;
}

layer_quant_config build_config(const linear_layer& layer, const number_format& f,
                                bool w_only, const calib_bundle& calib) {
    layer_quant_config cfg;
    quant_scheme w_scheme{f, granularity::per_channel, 0};
    cfg.w = {w_scheme, compute_scales(layer.w, w_scheme)};
    if (!w_only) {
        quant_scheme a_scheme{f, granularity::per_tensor, 0};
        cfg.a = {a_scheme, calibrate(batches_for(calib, layer.name), a_scheme)};
    }
    return cfg;
}

double mean_batch_mse(const std::vector<tensor>& refs, const std::vector<tensor>& outs) {
    double total = 0.0;
    for (size_t i = 0; i < refs.size(); ++i) total += mse(refs[i], outs[i]);
    return total / static_cast<double>(refs.size());
}

struct evaluator {
    const model_graph& model;
    const calib_bundle& calib;
    const selection_config& cfg;

    // Reference model outputs on the calibration inputs (first layer's
    // batches), computed lazily for the model-output metric.
    std::vector<tensor> model_inputs = {};
    std::vector<tensor> ref_outputs = {};

    void ensure_reference() {
        if (!ref_outputs.empty()) return;
        model_inputs = batches_for(calib, model.layers.front().name);
        for (const tensor& x : model_inputs) {
            ref_outputs.push_back(forward_fp(model, x).output);
        }
    }

    double tensor_error(const linear_layer& layer, const layer_quant_config& c) {
        double e = mse(layer.w, fake_quant(layer.w, c.w->first, c.w->second));
        if (c.a) {
            const auto& batches = batches_for(calib, layer.name);
            double a_err = 0.0;
            for (const tensor& b : batches) {
                a_err += mse(b, fake_quant(b, c.a->first, c.a->second));
            }
            e += a_err / static_cast<double>(batches.size());
        }
        return e;
    }

    double model_error(size_t layer_idx, const layer_quant_config& c,
                       const std::vector<layer_quant_config>& chosen_prefix) {
        ensure_reference();
        std::vector<layer_quant_config> configs(model.layers.size());
        if (cfg.sequential) {
            for (size_t i = 0; i < layer_idx && i < chosen_prefix.size(); ++i) {
                configs[i] = chosen_prefix[i];
            }
        }
        configs[layer_idx] = c;
        std::vector<tensor> outs;
        outs.reserve(model_inputs.size());
        for (const tensor& x : model_inputs) {
            outs.push_back(forward_quant(model, configs, x).output);
        }
        return mean_batch_mse(ref_outputs, outs);
    }

    double error_of(size_t layer_idx, const layer_quant_config& c,
                    const std::vector<layer_quant_config>& chosen_prefix) {
        const linear_layer& layer = model.layers[layer_idx];
        switch (cfg.metric) {
            case error_metric_kind::tensor_mse:
                return tensor_error(layer, c);
            case error_metric_kind::layer_output_mse:
                return layer_output_error(layer, c, batches_for(calib, layer.name),
                                          error_stat::mse);
            case error_metric_kind::model_output_mse:
                return model_error(layer_idx, c, chosen_prefix);
        }
        throw select_error("unknown error metric");
    }
};

json config_to_json(const selection_config& cfg) {
    json cands = json::array();
    for (const auto& f : cfg.candidates) cands.push_back(f.name());
    return {{"w_only", cfg.w_only},
            {"candidates", cands},
            {"bit_width", cfg.bit_width},
            {"metric", metric_name(cfg.metric)},
            {"tie_break", cfg.tie_break},
            {"sequential", cfg.sequential}};
}

} // namespace

selection_result mofq_select(const model_graph& model, const calib_bundle& calib,
                             const selection_config& cfg) {
    auto t0 = std::chrono::steady_clock::now();

    if (cfg.candidates.empty()) throw select_error("empty candidate list");
    for (const auto& f : cfg.candidates) {
        if (f.bits() != cfg.bit_width) {
            throw select_error("candidate " + f.name() + " is " + std::to_string(f.bits()) +
                               "-bit, config says " + std::to_string(cfg.bit_width));
        }
    }
    if (model.layers.empty()) throw select_error("model has no layers");

    selection_result res;
    res.report.config = cfg;
    evaluator eval{model, calib, cfg};

    size_t fp_count = 0;
    for (size_t k = 0; k < model.layers.size(); ++k) {
        const linear_layer& layer = model.layers[k];
        layer_selection sel;
        sel.layer = layer.name;

        size_t best = 0;
        double best_err = 0.0;
        std::vector<candidate_state> evals;
        try {
            for (size_t ci = 0; ci < cfg.candidates.size(); ++ci) {
                const number_format& f = cfg.candidates[ci];
                candidate_state st;
                st.cfg = build_config(layer, f, cfg.w_only, calib);
                st.error = eval.error_of(k, st.cfg, res.configs);
                sel.errors.push_back({f.name(), st.error});
                evals.push_back(std::move(st));

                bool better = ci == 0 || evals[ci].error < best_err ||
                              (evals[ci].error == best_err &&
                               tie_rank(cfg, f, ci) < tie_rank(cfg, cfg.candidates[best], best));
                if (better) {
                    best = ci;
                    best_err = evals[ci].error;
                }
            }
        } catch (const select_error&) {
            throw;
        } catch (const std::exception& e) {
            res.report.complete = false;
            res.report.wall_seconds = std::chrono::duration<double>(
                std::chrono::steady_clock::now() - t0).count();
            throw selection_failure("metric evaluation failed on layer " + layer.name +
                                    ": " + e.what(), res.report);
        }

        const number_format& chosen = cfg.candidates[best];
        sel.chosen = chosen.name();
        if (chosen.is_fp()) ++fp_count;
        res.report.layers.push_back(std::move(sel));
        res.configs.push_back(evals[best].cfg);

        quantized_layer ql;
        ql.name = layer.name;
        ql.nonlinearity = nonlinearity_name(layer.act);
        const auto& wcfg = *evals[best].cfg.w;
        ql.weight = quantize(layer.w, wcfg.first, wcfg.second);
        if (evals[best].cfg.a) {
            ql.a_format = evals[best].cfg.a->first.format;
            ql.a_scale = evals[best].cfg.a->second.scales.at(0);
        }
        res.qmodel.layers.push_back(std::move(ql));
    }

    res.report.fp_fraction =
        static_cast<double>(fp_count) / static_cast<double>(model.layers.size());
    res.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (res.report.wall_seconds <= 0.0) res.report.wall_seconds = 1e-9;
    return res;
}

selection_result quantize_uniform(const model_graph& model, const calib_bundle& calib,
                                  const number_format& format, bool w_only,
                                  error_metric_kind metric) {
    selection_config cfg;
    cfg.w_only = w_only;
    cfg.candidates = {format};
    cfg.bit_width = format.bits();
    cfg.metric = metric;
    return mofq_select(model, calib, cfg);
}

std::string report_to_json(const selection_report& r) {
    json layers = json::array();
    for (const auto& l : r.layers) {
        json errs = json::array();
        for (const auto& ce : l.errors) {
            errs.push_back({{"format", ce.format}, {"error", ce.error}});
        }
        layers.push_back({{"layer", l.layer}, {"chosen", l.chosen}, {"errors", errs}});
    }
    json out = {{"version", 1},
                {"config", config_to_json(r.config)},
                {"layers", layers},
                {"fp_fraction", r.fp_fraction},
                {"timing_seconds", r.wall_seconds},
                {"complete", r.complete}};
    return out.dump(2) + "\n";
}

std::string report_to_csv(const selection_report& r) {
    std::string out = "layer,candidate,error,chosen\n";
    for (const auto& l : r.layers) {
        for (const auto& ce : l.errors) {
            out += l.layer + "," + ce.format + "," + fmt_double(ce.error) + "," +
                   (ce.format == l.chosen ? "1" : "0") + "\n";
        }
    }
    return out;
}

} // namespace mofq
