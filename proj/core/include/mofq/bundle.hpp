#pragma once

#include "mofq/quant.hpp"
#include "mofq/tensor.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mofq {

/*
 * On-disk container: a directory holding `manifest.json` (schema version 1)
 * plus one raw little-endian blob file per tensor. f32le blobs are
 * row-major 32-bit reals with no header; u8 blobs hold quantization codes,
 * one code per byte.
 *
 * Model manifest:
 *   {"version": 1,
 *    "layers": [{"name": ..., "weight": <tensor>, "nonlinearity": "none"|"relu"|"gelu"}],
 *    "tensors": {<name>: {"file": ..., "shape": [...], "dtype": "f32le"}}}
 *
 * Calibration manifest uses "calib": [{"layer": ..., "batches": [<tensor>...]}],
 * plain input bundles use "inputs": [<tensor>...], and quantized models use
 * "quantized_layers" (format, granularity, axis, codes/scales blobs, and the
 * per-tensor activation format+scale in WA mode).
 */

struct layer_desc {
    std::string name;
    std::string weight;               // tensor name
    std::string nonlinearity = "none"; // none|relu|gelu
};

struct model_bundle {
    std::vector<layer_desc> layers;
    std::map<std::string, tensor> tensors;
};

// Per-layer calibration batches; each batch is [batch_size, layer_in].
struct calib_bundle {
    std::vector<std::string> layers; // layer order
    std::map<std::string, std::vector<tensor>> batches;
};

struct quantized_layer {
    std::string name;
    std::string nonlinearity = "none";
    quantized_tensor weight;
    std::optional<number_format> a_format; // WA mode only
    std::optional<float> a_scale;          // per-tensor activation scale
};

struct quantized_model {
    std::vector<quantized_layer> layers;
};

// Layer chain must be rank-2 weights with in_{k+1} == out_k; all blobs
// present and finite. Throws bundle_error.
void validate_model_bundle(const model_bundle& b);

// Every model layer needs >= 1 batch whose width matches the layer input.
void validate_calib_for_model(const model_bundle& m, const calib_bundle& c);

void save_model_bundle(const model_bundle& b, const std::filesystem::path& dir);
model_bundle load_model_bundle(const std::filesystem::path& dir);

void save_calib_bundle(const calib_bundle& c, const std::filesystem::path& dir);
calib_bundle load_calib_bundle(const std::filesystem::path& dir);

void save_input_bundle(const std::vector<tensor>& batches, const std::filesystem::path& dir);
std::vector<tensor> load_input_bundle(const std::filesystem::path& dir);

void save_quantized_model(const quantized_model& q, const std::filesystem::path& dir);
quantized_model load_quantized_model(const std::filesystem::path& dir);

// Write-to-temp-then-rename, so readers never observe partial files.
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

} // namespace mofq
