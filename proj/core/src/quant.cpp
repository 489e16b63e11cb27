#include "mofq/quant.hpp"
#include "mofq/errors.hpp"

#include <cfloat>
#include <cmath>

namespace mofq {

namespace {

void check_scheme(const std::vector<int64_t>& shape, const quant_scheme& scheme) {
    if (scheme.format.bits() > 8) {
        throw value_error("quantize: formats wider than 8 bits are not supported");
    }
    if (scheme.gran == granularity::per_channel &&
        (scheme.axis < 0 || scheme.axis >= static_cast<int>(shape.size()))) {
        throw value_error("per-channel axis " + std::to_string(scheme.axis) +
                          " invalid for shape " + shape_str(shape));
    }
}

size_t group_count(const tensor& t, const quant_scheme& scheme) {
    return scheme.gran == granularity::per_tensor
               ? 1
               : static_cast<size_t>(t.dim(scheme.axis));
}

// Group of element i: index along the per-channel axis.
struct grouper {
    int64_t stride = 0;
    int64_t dim = 1;
    bool per_tensor = true;

    grouper(const tensor& t, const quant_scheme& scheme) {
        if (scheme.gran == granularity::per_channel) {
            per_tensor = false;
            stride = stride_of(t, scheme.axis);
            dim = t.dim(scheme.axis);
        }
    }
    size_t operator()(int64_t i) const {
        return per_tensor ? 0 : static_cast<size_t>((i / stride) % dim);
    }
};

float scale_from_max(double group_max, double mf) {
    if (group_max == 0.0) return 1.0f; // sentinel; everything quantizes to 0
    auto s = static_cast<float>(group_max / mf);
    return s > 0.0f ? s : FLT_MIN; // keep scales strictly positive
}

} // namespace

scale_set compute_scales(const tensor& t, const quant_scheme& scheme) {
    validate_tensor(t, "compute_scales");
    check_scheme(t.shape, scheme);

    std::vector<float> gmax(group_count(t, scheme), 0.0f);
    grouper group(t, scheme);
    for (int64_t i = 0; i < t.numel(); ++i) {
        float a = std::fabs(t.data[static_cast<size_t>(i)]);
        auto g = group(i);
        if (a > gmax[g]) gmax[g] = a;
    }

    double mf = max_finite(scheme.format);
    scale_set out;
    out.scales.reserve(gmax.size());
    for (float m : gmax) out.scales.push_back(scale_from_max(m, mf));
    return out;
}

quantized_tensor quantize(const tensor& t, const quant_scheme& scheme, const scale_set& scales) {
    validate_tensor(t, "quantize");
    check_scheme(t.shape, scheme);
    if (scales.scales.size() != group_count(t, scheme)) {
        throw value_error("quantize: expected " + std::to_string(group_count(t, scheme)) +
                          " scales, got " + std::to_string(scales.scales.size()));
    }
    for (float s : scales.scales) {
        if (!(s > 0.0f) || !std::isfinite(s)) throw value_error("quantize: non-positive scale");
    }

    quantized_tensor q;
    q.shape = t.shape;
    q.scheme = scheme;
    q.scales = scales;
    q.codes.resize(t.data.size());

    grouper group(t, scheme);
    for (int64_t i = 0; i < t.numel(); ++i) {
        auto idx = static_cast<size_t>(i);
        double x = static_cast<double>(t.data[idx]) / scales.at(group(i));
        q.codes[idx] = static_cast<uint8_t>(encode(x, scheme.format));
    }
    return q;
}

tensor dequantize(const quantized_tensor& q) {
    tensor out = tensor::zeros(q.shape);
    grouper group(out, q.scheme);
    for (int64_t i = 0; i < out.numel(); ++i) {
        auto idx = static_cast<size_t>(i);
        double v = decode(q.codes[idx], q.scheme.format);
        out.data[idx] = static_cast<float>(v * static_cast<double>(q.scales.at(group(i))));
    }
    return out;
}

tensor fake_quant(const tensor& t, const quant_scheme& scheme, const scale_set& scales) {
    return dequantize(quantize(t, scheme, scales));
}

calibrator::calibrator(quant_scheme scheme) : scheme_(std::move(scheme)) {
    if (scheme_.gran == granularity::per_channel && scheme_.axis == 0) {
        throw value_error("calibrator: cannot group along the batch axis");
    }
}

void calibrator::observe(const tensor& batch) {
    validate_tensor(batch, "calibrator");
    check_scheme(batch.shape, scheme_);

    size_t groups = group_count(batch, scheme_);
    if (max_.empty()) {
        max_.assign(groups, 0.0f);
    } else if (max_.size() != groups) {
        throw value_error("calibrator: batch group count changed from " +
                          std::to_string(max_.size()) + " to " + std::to_string(groups));
    }

    grouper group(batch, scheme_);
    for (int64_t i = 0; i < batch.numel(); ++i) {
        float a = std::fabs(batch.data[static_cast<size_t>(i)]);
        auto g = group(i);
        if (a > max_[g]) max_[g] = a;
    }
    ++batches_;
}

scale_set calibrator::finalize() const {
    if (batches_ == 0) throw value_error("calibrate: no batches observed");
    double mf = max_finite(scheme_.format);
    scale_set out;
    out.scales.reserve(max_.size());
    for (float m : max_) out.scales.push_back(scale_from_max(m, mf));
    return out;
}

scale_set calibrate(const std::vector<tensor>& batches, const quant_scheme& scheme) {
    calibrator cal(scheme);
    for (const auto& b : batches) cal.observe(b);
    return cal.finalize();
}

} // namespace mofq
