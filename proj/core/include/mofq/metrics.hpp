#pragma once

#include "mofq/tensor.hpp"

namespace mofq {

// Where selection error is measured.
enum class error_metric_kind { tensor_mse, layer_output_mse, model_output_mse };

// Which statistic is reported for a reference/noisy pair.
enum class error_stat { mse, nsr };

// Mean squared elementwise difference. Symmetric. Reductions use
// Neumaier-compensated summation; results are stable to <= 1 ulp.
double mse(const tensor& a, const tensor& b);

// Noise-signal power ratio: sum((ref - noisy)^2) / sum(ref^2).
// Argument order matters: reference first. Throws value_error on an
// all-zero reference.
double nsr(const tensor& ref, const tensor& noisy);

const char* metric_name(error_metric_kind k);
error_metric_kind parse_metric(const std::string& name); // "tensor"|"layer"|"model"

} // namespace mofq
