#pragma once

#include "mofq/formats.hpp"
#include "mofq/tensor.hpp"

#include <cstdint>
#include <vector>

namespace mofq {

enum class granularity { per_tensor, per_channel };

struct quant_scheme {
    number_format format;
    granularity gran = granularity::per_tensor;
    int axis = 0; // per_channel only; weights use the output-channel axis (0)

    bool operator==(const quant_scheme&) const = default;
};

// One scale for per_tensor, dim(axis) scales for per_channel. Scales are
// stored as 32-bit reals, matching the container serialization.
struct scale_set {
    std::vector<float> scales;

    float at(size_t group) const { return scales[scales.size() == 1 ? 0 : group]; }
    bool operator==(const scale_set&) const = default;
};

// Codes are stored one per byte; 4-bit codes occupy the low nibble.
struct quantized_tensor {
    std::vector<uint8_t> codes;
    std::vector<int64_t> shape;
    quant_scheme scheme;
    scale_set scales;
};

// Symmetric max-abs rule: scale = max|x| over the group / max_finite(format).
// All-zero groups get the sentinel scale 1.
scale_set compute_scales(const tensor& t, const quant_scheme& scheme);

// codes[i] = encode(t[i] / scale(group(i)), format). Throws value_error on
// non-finite elements or a scheme/scale mismatch.
quantized_tensor quantize(const tensor& t, const quant_scheme& scheme, const scale_set& scales);

// out[i] = decode(codes[i]) * scale(group(i)).
tensor dequantize(const quantized_tensor& q);

// dequantize(quantize(t)); a projection onto the scaled value grid.
tensor fake_quant(const tensor& t, const quant_scheme& scheme, const scale_set& scales);

// Streaming max-abs calibration over batches (batch axis 0). Single-writer;
// run one calibrator per worker and merge by elementwise max if needed.
class calibrator {
  public:
    explicit calibrator(quant_scheme scheme);

    void observe(const tensor& batch);
    scale_set finalize() const; // running max / max_finite, sentinel 1 for all-zero groups
    int64_t batches_seen() const { return batches_; }
    const std::vector<float>& running_max() const { return max_; }

  private:
    quant_scheme scheme_;
    std::vector<float> max_;
    int64_t batches_ = 0;
};

// Equivalent to compute_scales on the concatenation of all batches.
scale_set calibrate(const std::vector<tensor>& batches, const quant_scheme& scheme);

} // namespace mofq
